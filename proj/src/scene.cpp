#include "kgas/scene.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <vector>

#include "kgas/error.hpp"
#include "kgas/image_io.hpp"
#include "kgas/rng.hpp"
#include "kgas/so3.hpp"

namespace kgas {
namespace {

constexpr double kPoseConcentration = 20.0;

double smoothstep(double a, double b, double x) {
  double u = (x - a) / (b - a);
  u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
  return u * u * (3.0 - 2.0 * u);
}

RotationMatrix rot_x(double deg) {
  return exp_so3(Vec3{deg * std::numbers::pi / 180.0, 0.0, 0.0});
}

RotationMatrix rot_z(double deg) {
  return exp_so3(Vec3{0.0, 0.0, deg * std::numbers::pi / 180.0});
}

// A straight surface segment bound to `joint`. The base blends back into the
// parent joint (none for the root) and the far end blends into `child_at_end`
// when another joint sits there, so skin weights stay continuous along a limb.
struct CapsuleSpec {
  int joint = 0;
  int parent = -1;
  int child_at_end = -1;
  Vec3 a;
  Vec3 b;
  double radius = 0.05;
  Vec3 color{0.8, 0.8, 0.8};
  std::size_t count = 0;
};

void capsule_frame(const Vec3& dir, Vec3& n1, Vec3& n2) {
  const Vec3 pick = std::abs(dir.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  n1 = normalized(cross(dir, pick));
  n2 = cross(dir, n1);
}

std::vector<SkinWeightEntry> capsule_weights(const CapsuleSpec& c, double t) {
  double w_base = c.parent >= 0 ? 0.5 + 0.5 * smoothstep(0.0, 0.25, t) : 1.0;
  double w_tip = c.child_at_end >= 0 ? 0.5 * smoothstep(0.75, 1.0, t) : 0.0;
  std::vector<SkinWeightEntry> row;
  const double w_self = w_base - w_tip;
  if (w_self > 1e-9) row.push_back({c.joint, w_self});
  if (c.parent >= 0 && 1.0 - w_base > 1e-9)
    row.push_back({c.parent, 1.0 - w_base});
  if (w_tip > 1e-9) row.push_back({c.child_at_end, w_tip});
  return row;
}

void sample_capsules(const std::vector<CapsuleSpec>& capsules, Rng& rng,
                     double scale, double opacity, GaussianCloud* cloud,
                     Rig* rig) {
  for (const auto& c : capsules) {
    const Vec3 axis = c.b - c.a;
    const double len = norm(axis);
    const Vec3 dir = axis / len;
    Vec3 n1, n2;
    capsule_frame(dir, n1, n2);
    for (std::size_t i = 0; i < c.count; ++i) {
      const double t = rng.uniform();
      const double phi = rng.uniform() * 2.0 * std::numbers::pi;
      const Vec3 p = c.a + dir * (t * len) +
                     (n1 * std::cos(phi) + n2 * std::sin(phi)) * c.radius;
      Gaussian3D g;
      g.position = p;
      g.scale = Vec3{scale, scale, scale};
      g.rotation = RotationMatrix{};
      g.opacity = opacity;
      g.color = c.color;
      cloud->gaussians.push_back(g);
      cloud->binding.rows.push_back(capsule_weights(c, t));
      rig->vertices.push_back(p);
      rig->weights.rows.push_back(cloud->binding.rows.back());
    }
  }
}

// Sparse start state: keep every `stride`-th reference point, optionally
// thinning harder inside a slab around rest-space plane x = hole_x (used to
// starve the arm's elbow so refinement has room to help).
GaussianCloud subsample(const GaussianCloud& ref, std::size_t stride,
                        double scale_up, double hole_x, double hole_half_width,
                        std::size_t hole_stride) {
  GaussianCloud out;
  for (std::size_t i = 0; i < ref.gaussians.size(); ++i) {
    const bool near_hole =
        hole_half_width > 0.0 &&
        std::abs(ref.gaussians[i].position.x - hole_x) < hole_half_width;
    const std::size_t step = near_hole ? hole_stride : stride;
    if (i % step != 0) continue;
    Gaussian3D g = ref.gaussians[i];
    g.scale = g.scale * scale_up;
    out.gaussians.push_back(g);
    out.binding.rows.push_back(ref.binding.rows[i]);
  }
  return out;
}

std::vector<FisherParams> pose_beliefs(const Pose& pose) {
  std::vector<FisherParams> out;
  out.reserve(pose.size());
  for (const auto& r : pose)
    out.push_back(FisherParams::from(r.m * kPoseConcentration));
  return out;
}

Camera front_camera(const Vec3& eye, double focal, int size) {
  Camera cam;
  cam.rotation = Mat3::diag(1.0, -1.0, -1.0);
  cam.translation = (cam.rotation * eye) * -1.0;
  cam.fx = cam.fy = focal;
  cam.width = cam.height = size;
  cam.cx = cam.cy = size / 2.0;
  return cam;
}

Scene make_arm2(std::uint64_t seed) {
  Scene s;
  s.name = "arm2";
  s.rig.tree.parent = {-1, 0};
  s.rig.tree.rest = {Vec3{0.0, 0.0, 0.0}, Vec3{0.5, 0.0, 0.0}};

  std::vector<CapsuleSpec> caps = {
      {0, -1, 1, Vec3{0.0, 0.0, 0.0}, Vec3{0.5, 0.0, 0.0}, 0.06,
       Vec3{0.85, 0.30, 0.20}, 1600},
      {1, 0, -1, Vec3{0.5, 0.0, 0.0}, Vec3{1.0, 0.0, 0.0}, 0.06,
       Vec3{0.20, 0.35, 0.85}, 1600},
  };
  Rng rng(seed);
  sample_capsules(caps, rng, 0.012, 0.85, &s.reference, &s.rig);
  // dense everywhere except a starved band around the elbow; the bend folds
  // the surface there, so the deformation detector concentrates on exactly
  // the region that needs more coverage
  s.initial = subsample(s.reference, 4, 1.0, 0.5, 0.10, 60);

  s.pose = {RotationMatrix{}, rot_z(50.0)};
  s.fisher = pose_beliefs(s.pose);
  s.camera = front_camera(Vec3{0.5, 0.12, 1.7}, 210.0, 160);
  return s;
}

Scene make_chain4(std::uint64_t seed) {
  Scene s;
  s.name = "chain4";
  s.rig.tree.parent = {-1, 0, 1, 2};
  s.rig.tree.rest = {Vec3{0.0, 0.0, 0.0}, Vec3{0.3, 0.0, 0.0},
                     Vec3{0.6, 0.0, 0.0}, Vec3{0.9, 0.0, 0.0}};

  const Vec3 palette[4] = {Vec3{0.85, 0.30, 0.25}, Vec3{0.90, 0.70, 0.20},
                           Vec3{0.30, 0.75, 0.35}, Vec3{0.25, 0.45, 0.85}};
  std::vector<CapsuleSpec> caps;
  for (int j = 0; j < 4; ++j) {
    CapsuleSpec c;
    c.joint = j;
    c.parent = j - 1;
    c.child_at_end = j < 3 ? j + 1 : -1;
    c.a = Vec3{0.3 * j, 0.0, 0.0};
    c.b = Vec3{0.3 * (j + 1), 0.0, 0.0};
    c.radius = 0.05;
    c.color = palette[j];
    c.count = 400;
    caps.push_back(c);
  }
  Rng rng(seed);
  sample_capsules(caps, rng, 0.012, 0.85, &s.reference, &s.rig);
  s.initial = subsample(s.reference, 3, 1.7, 0.0, 0.0, 1);

  s.pose = {RotationMatrix{}, rot_z(25.0), rot_z(-35.0), rot_x(30.0)};
  s.fisher = pose_beliefs(s.pose);
  s.camera = front_camera(Vec3{0.45, 0.10, 1.9}, 200.0, 160);
  return s;
}

Scene make_humanoid24(std::uint64_t seed) {
  Scene s;
  s.name = "humanoid24";
  s.rig.tree.parent = {-1, 0, 0, 0, 1, 2, 3, 4,  5,  6,  7,  8,
                       9,  9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};
  s.rig.tree.rest = {
      Vec3{0.00, 0.95, 0.0},  Vec3{0.09, 0.90, 0.0},  Vec3{-0.09, 0.90, 0.0},
      Vec3{0.00, 1.05, 0.0},  Vec3{0.10, 0.50, 0.0},  Vec3{-0.10, 0.50, 0.0},
      Vec3{0.00, 1.15, 0.0},  Vec3{0.10, 0.10, 0.0},  Vec3{-0.10, 0.10, 0.0},
      Vec3{0.00, 1.25, 0.0},  Vec3{0.12, 0.03, 0.1},  Vec3{-0.12, 0.03, 0.1},
      Vec3{0.00, 1.40, 0.0},  Vec3{0.06, 1.32, 0.0},  Vec3{-0.06, 1.32, 0.0},
      Vec3{0.00, 1.52, 0.0},  Vec3{0.18, 1.35, 0.0},  Vec3{-0.18, 1.35, 0.0},
      Vec3{0.45, 1.35, 0.0},  Vec3{-0.45, 1.35, 0.0}, Vec3{0.70, 1.35, 0.0},
      Vec3{-0.70, 1.35, 0.0}, Vec3{0.78, 1.35, 0.0},  Vec3{-0.78, 1.35, 0.0}};

  auto radius_for = [](int child) {
    switch (child) {
      case 3: case 6: case 9: case 12: return 0.085;
      case 15: return 0.075;
      case 13: case 14: case 16: case 17: return 0.05;
      case 1: case 2: case 4: case 5: return 0.055;
      case 7: case 8: return 0.045;
      case 10: case 11: case 22: case 23: return 0.035;
      default: return 0.04;
    }
  };
  const Vec3 palette[8] = {Vec3{0.85, 0.30, 0.25}, Vec3{0.25, 0.45, 0.85},
                           Vec3{0.30, 0.75, 0.35}, Vec3{0.90, 0.70, 0.20},
                           Vec3{0.60, 0.30, 0.80}, Vec3{0.20, 0.70, 0.70},
                           Vec3{0.85, 0.50, 0.65}, Vec3{0.55, 0.55, 0.30}};
  std::vector<CapsuleSpec> caps;
  for (int c = 1; c < 24; ++c) {
    const int p = s.rig.tree.parent[c];
    CapsuleSpec cap;
    cap.joint = p;
    cap.parent = s.rig.tree.parent[p];
    cap.child_at_end = c;
    cap.a = s.rig.tree.rest[p];
    cap.b = s.rig.tree.rest[c];
    cap.radius = radius_for(c);
    cap.color = palette[c % 8];
    cap.count = 120;
    caps.push_back(cap);
  }
  Rng rng(seed);
  sample_capsules(caps, rng, 0.014, 0.85, &s.reference, &s.rig);
  s.initial = subsample(s.reference, 3, 1.7, 0.0, 0.0, 1);

  s.pose.assign(24, RotationMatrix{});
  s.pose[4] = rot_x(20.0);
  s.pose[5] = rot_x(20.0);
  s.pose[9] = rot_z(8.0);
  s.pose[12] = rot_x(-10.0);
  s.pose[18] = rot_z(-30.0);
  s.pose[19] = rot_z(30.0);
  s.fisher = pose_beliefs(s.pose);
  s.camera = front_camera(Vec3{0.0, 0.85, 3.0}, 280.0, 192);
  return s;
}

// Two half-planes meeting along the x axis; the fold puts neighbor normals
// across the crease 60 degrees apart while in-plane normals stay parallel.
// Spacing along the crease is half the spacing across it, which keeps the
// crease rows' neighborhoods from straddling the fold symmetrically (an exact
// covariance tie) and keeps detection margins wide on both sides.
Scene make_creased_sheet(std::uint64_t /*seed*/) {
  Scene s;
  s.name = "creased_sheet";
  s.rig.tree.parent = {-1};
  s.rig.tree.rest = {Vec3{0.0, 0.0, 0.0}};

  const int ncols = 41, nrows = 21;
  const double du = 0.025, dv = 0.05;
  const double half_angle = 30.0 * std::numbers::pi / 180.0;
  for (int iv = -(nrows / 2); iv <= nrows / 2; ++iv) {
    for (int iu = -(ncols / 2); iu <= ncols / 2; ++iu) {
      const double u = iu * du, v = iv * dv;
      const double sgn = v <= 0.0 ? -1.0 : 1.0;
      const Vec3 p{u, sgn * std::abs(v) * std::sin(half_angle),
                   std::abs(v) * std::cos(half_angle)};
      Gaussian3D g;
      g.position = p;
      g.scale = Vec3{0.008, 0.008, 0.008};
      g.rotation = RotationMatrix{};
      g.opacity = 0.9;
      g.color = Vec3{0.80, 0.78, 0.30};
      s.reference.gaussians.push_back(g);
      s.reference.binding.rows.push_back({{0, 1.0}});
      s.rig.vertices.push_back(p);
      s.rig.weights.rows.push_back({{0, 1.0}});
    }
  }
  s.initial = s.reference;

  s.pose = {RotationMatrix{}};
  s.fisher = pose_beliefs(s.pose);
  s.camera = front_camera(Vec3{0.0, 0.0, 1.8}, 190.0, 160);
  return s;
}

}  // namespace

Scene make_scene(const std::string& name, std::uint64_t seed) {
  Scene s;
  if (name == "arm2")
    s = make_arm2(seed);
  else if (name == "chain4")
    s = make_chain4(seed);
  else if (name == "humanoid24")
    s = make_humanoid24(seed);
  else if (name == "creased_sheet")
    s = make_creased_sheet(seed);
  else
    throw ValidationError("unknown scene '" + name +
                          "' (expected arm2, chain4, humanoid24 or creased_sheet)");
  s.rig.validate();
  s.reference.validate(s.rig.tree.joint_count());
  s.initial.validate(s.rig.tree.joint_count());
  if (s.pose.size() != s.rig.tree.parent.size())
    throw ValidationError("scene pose size mismatch");
  return s;
}

void write_scene_files(const Scene& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/" + scene.name;
  save_rig(scene.rig, base + "_rig.txt");
  save_ply_cloud(scene.initial, base + "_init.ply");

  const JointTransforms fk = forward_kinematics(scene.rig.tree, scene.pose);
  const GaussianCloud posed = articulate(scene.reference, fk);
  save_ply_cloud(posed, base + "_ref.ply");

  const ImageRGBA img = render(posed, scene.camera);
  write_ppm(img, base + "_ref.ppm");
  std::vector<double> mask(img.alpha.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = img.alpha[i] >= 0.5 ? 1.0 : 0.0;
  write_pgm(mask, img.width, img.height, base + "_ref_mask.pgm");
  write_pfm(img.depth, img.width, img.height, base + "_ref_depth.pfm");
  save_camera(scene.camera, base + "_camera.txt");
}

}  // namespace kgas
