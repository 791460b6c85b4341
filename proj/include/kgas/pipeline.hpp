#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "kgas/cloud.hpp"
#include "kgas/metrics.hpp"
#include "kgas/scene.hpp"
#include "kgas/uid.hpp"

namespace kgas {

// Full experiment description. Either a synthetic scene name or a file
// route (rig + cloud + reference image + mask + camera); the file route
// poses nothing (identity pose, neutral rotation beliefs).
struct ExperimentConfig {
  // [scene]
  std::string scene_name;
  std::string rig_path;
  std::string cloud_path;
  std::string reference_path;
  std::string mask_path;
  std::string camera_path;

  // [jntm]
  double gamma = 0.3;

  // [uid]
  UidParams uid;

  // [densify]
  double mode_threshold = 0.01;
  double phi = 1.6;
  int iterations = 2;
  double min_opacity = 0.005;

  // [loss]
  LossWeights weights;
  int s3im_shuffles = 10;
  int s3im_kernel = 4;
  int s3im_stride = 4;
  std::uint64_t s3im_seed = 0;

  // [run]
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  // section.key names that were given explicitly (scene defaults do not
  // override these).
  std::set<std::string> specified;

  void validate() const;
};

// INI-style config: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys are errors; parse errors report line numbers.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

// Absolute tolerance band around a frozen color-loss-reduction baseline;
// written into the manifest next to the achieved reduction so reruns can
// be checked against it.
inline constexpr double kColorReductionBand = 0.02;

struct IterationRecord {
  std::size_t gaussians = 0;  // cloud size after this iteration's density pass
  std::size_t flagged = 0;
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t pruned = 0;
  LossReport loss;
};

struct RunResult {
  std::string scene_name;
  std::string out_dir;
  std::size_t joint_count = 0;
  std::size_t initial_gaussians = 0;
  std::vector<IterationRecord> iterations;  // [0] scores the initial cloud
};

// Runs the experiment loop: propagate rotation beliefs once, then per
// refinement iteration detect deformed regions on the posed cloud, densify
// with motion factors, prune low-opacity Gaussians, articulate, render and
// score against the reference. Iteration 0 scores the initial cloud as-is.
// Writes all artifacts plus manifest.txt (deterministic) and timings.txt
// (wall-clock, excluded from determinism) under config.out_dir. Errors are
// rethrown tagged with the stage name and iteration index.
RunResult run_pipeline(const ExperimentConfig& config);

}  // namespace kgas
