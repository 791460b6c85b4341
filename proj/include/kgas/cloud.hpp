#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgas/kinematics.hpp"
#include "kgas/rng.hpp"
#include "kgas/so3.hpp"
#include "kgas/vec.hpp"

namespace kgas {

// Anisotropic 3D Gaussian primitive. Scale components must stay above 1e-8
// and opacity in (0, 1]; validate() enforces both plus color range.
struct Gaussian3D {
  Vec3 position{0.0, 0.0, 0.0};
  RotationMatrix rotation;
  Vec3 scale{1.0, 1.0, 1.0};
  double opacity = 1.0;
  Vec3 color{1.0, 1.0, 1.0};

  void validate() const;
};

// Gaussian set plus optional per-Gaussian joint binding (same layout as
// vertex skin weights). binding may be empty for unbound clouds.
struct GaussianCloud {
  std::vector<Gaussian3D> gaussians;
  SkinWeights binding;

  bool bound() const { return !binding.rows.empty(); }
  void validate(std::size_t joint_count) const;
};

// Sigma = R diag(s)^T diag(s) R^T: symmetric positive definite.
Mat3 covariance(const Gaussian3D& g);

// Closed-form inverse R diag(1/s^2) R^T and determinant (s1 s2 s3)^2.
// Throws NumericError if any scale component is at or below 1e-8.
void covariance_inverse_det(const Gaussian3D& g, Mat3& inverse, double& determinant);

// Per-joint relative anisotropy |s| / max|s| in (0, 1]^3. A numerically
// zero triple maps to the neutral (1, 1, 1): magnitude carries
// concentration, not length, so only the shape transfers.
Vec3 normalize_motion_scale(const Vec3& s_factor);

// Displacement draw with covariance R_g diag(|s_factor| . s_g)^2 R_g^T,
// i.e. the Gaussian's own ellipsoid reshaped by the motion anisotropy.
// Deterministic per seed. Callers pass an already-normalized s_factor.
Vec3 density_perceptual_sample(const Gaussian3D& g, const Vec3& s_factor,
                               std::uint64_t seed);

// New Gaussian jittered around the parent: scale = |normalized s_factor| . s_g,
// rotation = r_mode * R_g, opacity and color inherited.
Gaussian3D clone_with_motion(const Gaussian3D& g, const Vec3& s_factor,
                             const RotationMatrix& r_mode, std::uint64_t seed);

// Two children replacing an oversized parent; scales additionally shrink by
// the split factor phi.
std::pair<Gaussian3D, Gaussian3D> split_with_motion(const Gaussian3D& g,
                                                    const Vec3& s_factor,
                                                    const RotationMatrix& r_mode,
                                                    double phi, std::uint64_t seed);

enum class DensifyTrigger { Uid, Gradient };

struct DensifyCandidate {
  std::size_t index = 0;
  DensifyTrigger trigger = DensifyTrigger::Uid;
};

struct DensifyStats {
  std::size_t cloned = 0;
  std::size_t split = 0;
};

// Motion-guided density control. Candidates (sorted, unique indices) whose
// max scale component exceeds mode_threshold are split, the rest cloned.
// Each candidate fetches the (s_factor, r_mode) of its dominant binding
// joint. Non-candidate Gaussians are carried over bitwise; new Gaussians
// append in candidate order, so the cloud grows by exactly the candidate
// count. Deterministic per seed.
GaussianCloud densify(const GaussianCloud& cloud,
                      const std::vector<DensifyCandidate>& candidates,
                      const MotionFactors& factors, double mode_threshold,
                      double phi, std::uint64_t seed,
                      DensifyStats* stats = nullptr);

// Poses a bound cloud: positions blend by LBS, each rotation is
// premultiplied by its dominant joint's world rotation (ties to the
// smaller joint index). Scale, opacity and color are unchanged.
GaussianCloud articulate(const GaussianCloud& cloud,
                         const JointTransforms& transforms);

// ASCII PLY with properties x y z, rot_w rot_x rot_y rot_z (unit
// quaternion, rejected when off unit length by more than 1e-3),
// scale_x/y/z, opacity, red green blue. Binding is not serialized.
void save_ply_cloud(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_ply_cloud(const std::string& path);

// Point-set PLY (x y z, optional nx ny nz). The loader accepts any ASCII
// PLY containing x y z columns, including Gaussian cloud files.
void save_ply_points(const std::vector<Vec3>& points, const std::string& path,
                     const std::vector<Vec3>* normals = nullptr);
std::vector<Vec3> load_ply_points(const std::string& path);

}  // namespace kgas
