#pragma once

#include <string>
#include <vector>

#include "kgas/fisher.hpp"
#include "kgas/so3.hpp"
#include "kgas/vec.hpp"

namespace kgas {

// Joint hierarchy with rest-pose joint positions. Parents must precede
// children (parent[i] < i); roots carry parent -1.
struct KinematicTree {
  std::vector<int> parent;
  std::vector<Vec3> rest;

  std::size_t joint_count() const { return parent.size(); }
  void validate() const;
};

struct SkinWeightEntry {
  int joint = 0;
  double weight = 0.0;
};

// Per-vertex sparse binding, at most 4 joints per vertex, weights
// nonnegative and summing to 1 within 1e-6.
struct SkinWeights {
  std::vector<std::vector<SkinWeightEntry>> rows;

  void validate(std::size_t joint_count) const;
};

// Local joint rotations, one per joint.
using Pose = std::vector<RotationMatrix>;

// World-space rigid transform per joint: x -> rotation * x + translation.
struct JointTransforms {
  std::vector<Mat3> rotation;
  std::vector<Vec3> translation;
};

// Composes local rotations about rest-pose joint positions down the tree.
// The all-identity pose yields identity transforms exactly.
JointTransforms forward_kinematics(const KinematicTree& tree, const Pose& pose);

// Linear blend skinning: v' = sum_k w_k (G_k v + t_k).
std::vector<Vec3> lbs_skin(const SkinWeights& weights,
                           const JointTransforms& transforms,
                           const std::vector<Vec3>& vertices);

// Per-joint motion factors extracted from Fisher parameters: proper
// singular values and the mode rotation.
struct MotionFactors {
  std::vector<Vec3> s;
  std::vector<RotationMatrix> r_mode;
};

// Propagates rotation beliefs down the tree: in topological order each
// child's parameter matrix is premultiplied by the gamma-geodesic rotation
// of its (already refined) parent's mode. gamma in [0, 1]; roots unchanged.
std::vector<FisherParams> jntm_propagate(const KinematicTree& tree,
                                         const std::vector<FisherParams>& params,
                                         double gamma);

MotionFactors motion_factors(const std::vector<FisherParams>& params);

// Rig bundle: hierarchy, binding and rest vertices.
struct Rig {
  KinematicTree tree;
  SkinWeights weights;
  std::vector<Vec3> vertices;

  void validate() const;
};

// Text rig format with three sections:
//   joints    lines "index parent x y z"  (parent -1 for roots)
//   weights   lines "vertex joint:weight [joint:weight ...]"  (up to 4)
//   vertices  lines "x y z"
// '#' starts a comment. Parse errors report the line number.
Rig load_rig(const std::string& path);
void save_rig(const Rig& rig, const std::string& path);

}  // namespace kgas
