#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgas/cloud.hpp"
#include "kgas/fisher.hpp"
#include "kgas/kinematics.hpp"
#include "kgas/render.hpp"

namespace kgas {

// Closed synthetic fixture: a rig, a dense rest-space reference cloud, a
// sparse initial cloud (both bound to the rig), a target pose, per-joint
// rotation beliefs concentrated on the pose, and a camera. The reference
// render of the articulated reference cloud serves as ground truth.
struct Scene {
  std::string name;
  Rig rig;
  GaussianCloud reference;
  GaussianCloud initial;
  Pose pose;
  std::vector<FisherParams> fisher;
  Camera camera;
};

// Deterministic per (name, seed). Known names: arm2, chain4, humanoid24,
// creased_sheet. Rotation beliefs use kappa0 * R_pose with kappa0 = 20, so
// each joint's mode recovers its pose rotation.
Scene make_scene(const std::string& name, std::uint64_t seed);

// Materializes <name>_rig.txt, <name>_init.ply, <name>_ref.ply (posed),
// <name>_ref.ppm / _ref_mask.pgm / _ref_depth.pfm and <name>_camera.txt
// under dir.
void write_scene_files(const Scene& scene, const std::string& dir);

}  // namespace kgas
