#pragma once

#include <cstddef>
#include <functional>

namespace kgas {

// Worker count used by parallel_for. Resolution order: KGAS_THREADS
// environment variable (positive integer), otherwise hardware concurrency.
std::size_t thread_budget();

// Runs fn(i) for i in [0, n). Work is partitioned into contiguous blocks,
// one per worker. fn must only write to state owned by index i so that the
// result is identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kgas
