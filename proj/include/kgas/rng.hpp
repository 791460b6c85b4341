#pragma once

#include <cstdint>
#include <vector>

#include "kgas/so3.hpp"
#include "kgas/vec.hpp"

namespace kgas {

// Deterministic counter-based generator (SplitMix64 stream). The same seed
// yields the same sequence on every platform; fork(k) derives an
// independent child stream for sub-task k.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (second value cached).
  double normal();

  // Haar-uniform rotation from three uniform variates (subgroup algorithm).
  RotationMatrix uniform_rotation();

  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Unit quaternion (w, x, y, z) to rotation matrix. q need not be normalized
// beyond ~1e-3; it is renormalized exactly before conversion.
Mat3 quat_to_mat(double w, double x, double y, double z);

// Rotation matrix to unit quaternion with w >= 0.
void mat_to_quat(const Mat3& m, double& w, double& x, double& y, double& z);

// Deterministic quasi-uniform covering of SO(3): Halton sequence in bases
// 2, 3, 5 pushed through the subgroup algorithm. Used by verification
// workloads that need a reproducible rotation grid.
std::vector<RotationMatrix> so3_quasi_grid(std::size_t n);

}  // namespace kgas
