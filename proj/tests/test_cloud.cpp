#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kgas/cloud.hpp"
#include "kgas/error.hpp"
#include "kgas/rng.hpp"
#include "kgas/scene.hpp"
#include "oracles.hpp"

using namespace kgas;

namespace {

Gaussian3D random_gaussian(Rng& rng) {
  Gaussian3D g;
  g.position = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  g.rotation = rng.uniform_rotation();
  g.scale = Vec3{std::exp(rng.uniform(-6.0, 2.0)), std::exp(rng.uniform(-6.0, 2.0)),
                 std::exp(rng.uniform(-6.0, 2.0))};
  g.opacity = rng.uniform(0.05, 1.0);
  g.color = Vec3{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
  return g;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "kgas_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool same_gaussian_bits(const Gaussian3D& a, const Gaussian3D& b) {
  return std::memcmp(&a.position, &b.position, sizeof(Vec3)) == 0 &&
         std::memcmp(&a.rotation, &b.rotation, sizeof(RotationMatrix)) == 0 &&
         std::memcmp(&a.scale, &b.scale, sizeof(Vec3)) == 0 &&
         a.opacity == b.opacity &&
         std::memcmp(&a.color, &b.color, sizeof(Vec3)) == 0;
}

}  // namespace

TEST_CASE("gaussian validation rejects bad scale, opacity and color") {
  Gaussian3D g;
  g.scale = Vec3{0.1, 0.1, 0.1};
  g.opacity = 0.5;
  CHECK_NOTHROW(g.validate());
  g.scale.y = 0.0;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g.scale.y = 0.1;
  g.opacity = 0.0;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g.opacity = 1.5;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g.opacity = 0.5;
  g.color.x = 1.5;
  CHECK_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("covariance assembly and inverse match Eigen") {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const Gaussian3D g = random_gaussian(rng);
    const Mat3 sigma = covariance(g);

    const Eigen::Matrix3d r = oracles::to_eigen(g.rotation.m);
    const Eigen::Vector3d s = oracles::to_eigen(g.scale);
    const Eigen::Matrix3d ref =
        r * s.cwiseProduct(s).asDiagonal() * r.transpose();
    CHECK(frobenius_norm(sigma - oracles::from_eigen(ref)) <=
          1e-12 * (1.0 + ref.norm()));

    Mat3 inv;
    double determinant = 0.0;
    covariance_inverse_det(g, inv, determinant);
    // any inverse here - closed form or factorized solve - carries an error
    // that grows with cond(Sigma), so the bounds must scale with it; a raw
    // cofactor inverse as reference would be the least accurate of all
    const double smax = std::max({g.scale.x, g.scale.y, g.scale.z});
    const double smin = std::min({g.scale.x, g.scale.y, g.scale.z});
    const double cond = (smax / smin) * (smax / smin);
    const Eigen::Matrix3d product = ref * oracles::to_eigen(inv);
    CHECK((product - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <=
          1e-12 * (1.0 + cond));
    const Eigen::Matrix3d solved = ref.llt().solve(Eigen::Matrix3d::Identity());
    CHECK(frobenius_norm(inv - oracles::from_eigen(solved)) <=
          1e-12 * (1.0 + cond) * (1.0 + solved.norm()));
    const double det_ref = ref.determinant();
    CHECK(determinant == doctest::Approx(det_ref).epsilon(1e-9));
  }
}

TEST_CASE("motion scale normalization maps magnitude to shape") {
  const Vec3 a = normalize_motion_scale(Vec3{2.0, 4.0, 1.0});
  CHECK(a.x == doctest::Approx(0.5));
  CHECK(a.y == doctest::Approx(1.0));
  CHECK(a.z == doctest::Approx(0.25));

  const Vec3 b = normalize_motion_scale(Vec3{-2.0, 4.0, -8.0});
  CHECK(b.x == doctest::Approx(0.25));
  CHECK(b.y == doctest::Approx(0.5));
  CHECK(b.z == doctest::Approx(1.0));

  // a numerically zero triple is neutral, not degenerate
  const Vec3 c = normalize_motion_scale(Vec3{0.0, 0.0, 0.0});
  CHECK(c.x == 1.0);
  CHECK(c.y == 1.0);
  CHECK(c.z == 1.0);
}

TEST_CASE("displacement sampling is deterministic and shape-aware") {
  Gaussian3D g;
  g.rotation = exp_so3(Vec3{0.4, 0.2, -0.3});
  g.scale = Vec3{0.04, 0.01, 0.02};
  g.opacity = 0.9;

  const Vec3 s_hat = normalize_motion_scale(Vec3{30.0, 10.0, 20.0});
  const Vec3 d1 = density_perceptual_sample(g, s_hat, 77);
  const Vec3 d2 = density_perceptual_sample(g, s_hat, 77);
  CHECK(norm(d1 - d2) == 0.0);
  const Vec3 d3 = density_perceptual_sample(g, s_hat, 78);
  CHECK(norm(d1 - d3) > 0.0);

  // an all-but-vanished factor triple collapses displacements to zero
  const Vec3 tiny = density_perceptual_sample(g, Vec3{1e-12, 1e-12, 1e-12}, 77);
  CHECK(norm(tiny) <= 1e-12);

  // empirical covariance approaches R diag((s_hat . s)^2) R^T
  const int n = 20000;
  Mat3 acc;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = density_perceptual_sample(g, s_hat, static_cast<std::uint64_t>(i));
    const Mat3 op = outer(d, d);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) acc[r][c] += op[r][c];
  }
  const Mat3 emp = acc * (1.0 / n);
  const Vec3 eff{s_hat.x * g.scale.x, s_hat.y * g.scale.y, s_hat.z * g.scale.z};
  const Mat3 target = g.rotation.m *
                      Mat3::diag(eff.x * eff.x, eff.y * eff.y, eff.z * eff.z) *
                      transpose(g.rotation.m);
  CHECK(frobenius_norm(emp - target) <= 0.08 * frobenius_norm(target));
}

TEST_CASE("clone inherits appearance and composes rotations exactly") {
  Rng rng(8);
  const Gaussian3D g = random_gaussian(rng);
  const RotationMatrix r_mode = rng.uniform_rotation();
  const Vec3 s_factor{18.0, 6.0, 12.0};

  const Gaussian3D c = clone_with_motion(g, s_factor, r_mode, 123);
  const Mat3 expect_rot = r_mode.m * g.rotation.m;
  CHECK(frobenius_norm(c.rotation.m - expect_rot) == 0.0);
  CHECK(c.opacity == g.opacity);
  CHECK(norm(c.color - g.color) == 0.0);

  const Vec3 s_hat = normalize_motion_scale(s_factor);
  CHECK(c.scale.x == doctest::Approx(s_hat.x * g.scale.x).epsilon(1e-12));
  CHECK(c.scale.y == doctest::Approx(s_hat.y * g.scale.y).epsilon(1e-12));
  CHECK(c.scale.z == doctest::Approx(s_hat.z * g.scale.z).epsilon(1e-12));
  CHECK(norm(c.position - g.position) > 0.0);  // jittered
}

TEST_CASE("split produces two shrunken children and validates phi") {
  Rng rng(9);
  const Gaussian3D g = random_gaussian(rng);
  const RotationMatrix r_mode = rng.uniform_rotation();
  const Vec3 s_factor{1.0, 1.0, 1.0};

  const auto [a, b] = split_with_motion(g, s_factor, r_mode, 1.6, 5);
  CHECK(a.scale.x == doctest::Approx(g.scale.x / 1.6).epsilon(1e-12));
  CHECK(b.scale.y == doctest::Approx(g.scale.y / 1.6).epsilon(1e-12));
  CHECK(norm(a.position - b.position) > 0.0);
  CHECK(a.opacity == g.opacity);

  CHECK_THROWS_AS(split_with_motion(g, s_factor, r_mode, 1.0, 5), ValidationError);
  CHECK_THROWS_AS(split_with_motion(g, s_factor, r_mode, 0.5, 5), ValidationError);
}

TEST_CASE("densify splits oversized candidates, clones the rest, keeps others") {
  const Scene scene = make_scene("arm2", 21);
  GaussianCloud cloud = scene.initial;
  // make one candidate small so it clones
  cloud.gaussians[4].scale = Vec3{0.004, 0.004, 0.004};

  const MotionFactors factors = motion_factors(scene.fisher);
  const std::vector<DensifyCandidate> candidates = {
      {2, DensifyTrigger::Uid}, {4, DensifyTrigger::Uid}, {9, DensifyTrigger::Uid}};

  DensifyStats stats;
  const GaussianCloud out =
      densify(cloud, candidates, factors, 0.01, 1.6, 31337, &stats);

  CHECK(out.gaussians.size() == cloud.gaussians.size() + candidates.size());
  CHECK(stats.cloned == 1);
  CHECK(stats.split == 2);
  REQUIRE(out.binding.rows.size() == out.gaussians.size());

  // non-candidates carry over bitwise, in order
  std::size_t kept = 0;
  for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
    if (i == 2 || i == 4 || i == 9) continue;
    // locate: kept originals stay at their compacted positions
    while (kept < out.gaussians.size() &&
           !same_gaussian_bits(out.gaussians[kept], cloud.gaussians[i]))
      ++kept;
    REQUIRE(kept < out.gaussians.size());
    ++kept;
  }

  CHECK_THROWS_AS(densify(cloud, {{99999, DensifyTrigger::Uid}}, factors, 0.01,
                          1.6, 1, nullptr),
                  ValidationError);
  CHECK_THROWS_AS(densify(cloud,
                          {{4, DensifyTrigger::Uid}, {2, DensifyTrigger::Uid}},
                          factors, 0.01, 1.6, 1, nullptr),
                  ValidationError);  // not sorted
  CHECK_THROWS_AS(densify(cloud,
                          {{4, DensifyTrigger::Uid}, {4, DensifyTrigger::Uid}},
                          factors, 0.01, 1.6, 1, nullptr),
                  ValidationError);  // duplicate
}

TEST_CASE("densify is deterministic per seed") {
  const Scene scene = make_scene("chain4", 2);
  const MotionFactors factors = motion_factors(scene.fisher);
  const std::vector<DensifyCandidate> candidates = {{0, DensifyTrigger::Uid},
                                                    {7, DensifyTrigger::Uid}};
  const GaussianCloud a = densify(scene.initial, candidates, factors, 0.01, 1.6, 5, nullptr);
  const GaussianCloud b = densify(scene.initial, candidates, factors, 0.01, 1.6, 5, nullptr);
  REQUIRE(a.gaussians.size() == b.gaussians.size());
  for (std::size_t i = 0; i < a.gaussians.size(); ++i)
    CHECK(same_gaussian_bits(a.gaussians[i], b.gaussians[i]));
  const GaussianCloud c = densify(scene.initial, candidates, factors, 0.01, 1.6, 6, nullptr);
  bool all_same = true;
  for (std::size_t i = 0; i < a.gaussians.size(); ++i)
    all_same = all_same && same_gaussian_bits(a.gaussians[i], c.gaussians[i]);
  CHECK_FALSE(all_same);
}

TEST_CASE("articulation blends positions and premultiplies dominant rotations") {
  const Scene scene = make_scene("arm2", 13);
  const JointTransforms fk = forward_kinematics(scene.rig.tree, scene.pose);
  const GaussianCloud posed = articulate(scene.reference, fk);
  REQUIRE(posed.gaussians.size() == scene.reference.gaussians.size());

  const std::vector<Vec3> skinned = lbs_skin(
      scene.reference.binding, fk,
      [&] {
        std::vector<Vec3> v;
        for (const auto& g : scene.reference.gaussians) v.push_back(g.position);
        return v;
      }());
  for (std::size_t i = 0; i < posed.gaussians.size(); ++i) {
    CHECK(norm(posed.gaussians[i].position - skinned[i]) <= 1e-12);
    // dominant joint of this row
    const auto& row = scene.reference.binding.rows[i];
    int dom = row[0].joint;
    double best = row[0].weight;
    for (const auto& e : row)
      if (e.weight > best + 1e-15 || (e.weight == best && e.joint < dom)) {
        best = e.weight;
        dom = e.joint;
      }
    const Mat3 expect = fk.rotation[static_cast<std::size_t>(dom)] *
                        scene.reference.gaussians[i].rotation.m;
    CHECK(frobenius_norm(posed.gaussians[i].rotation.m - expect) == 0.0);
  }

  GaussianCloud unbound;
  unbound.gaussians = scene.reference.gaussians;
  CHECK_THROWS_AS(articulate(unbound, fk), ValidationError);
}

TEST_CASE("gaussian cloud PLY round-trips at nine significant digits") {
  Rng rng(3);
  GaussianCloud cloud;
  for (int i = 0; i < 40; ++i) cloud.gaussians.push_back(random_gaussian(rng));

  const auto path = temp_file("cloud_roundtrip.ply");
  save_ply_cloud(cloud, path.string());
  const GaussianCloud back = load_ply_cloud(path.string());
  REQUIRE(back.gaussians.size() == cloud.gaussians.size());
  for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
    const auto& a = cloud.gaussians[i];
    const auto& b = back.gaussians[i];
    CHECK(norm(a.position - b.position) <= 1e-8 * (1.0 + norm(a.position)));
    CHECK(frobenius_norm(a.rotation.m - b.rotation.m) <= 1e-7);
    CHECK(norm(a.scale - b.scale) <= 1e-8 * (1.0 + norm(a.scale)));
    CHECK(a.opacity == doctest::Approx(b.opacity).epsilon(1e-8));
    CHECK(norm(a.color - b.color) <= 1e-8);
  }

  // corrupt quaternion: unit-length check trips
  const auto bad = temp_file("cloud_bad_quat.ply");
  {
    std::ofstream out(bad);
    out << "ply\nformat ascii 1.0\nelement vertex 1\n"
           "property float x\nproperty float y\nproperty float z\n"
           "property float rot_w\nproperty float rot_x\nproperty float rot_y\n"
           "property float rot_z\n"
           "property float scale_x\nproperty float scale_y\nproperty float scale_z\n"
           "property float opacity\n"
           "property float red\nproperty float green\nproperty float blue\n"
           "end_header\n"
           "0 0 0  2 0 0 0  0.1 0.1 0.1  0.5  1 0 0\n";
  }
  CHECK_THROWS_AS(load_ply_cloud(bad.string()), ValidationError);
}

TEST_CASE("point PLY writes normals and reads gaussian files") {
  const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0.5, -2}, {0.25, -0.125, 3}};
  const std::vector<Vec3> normals = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
  const auto path = temp_file("points.ply");
  save_ply_points(pts, path.string(), &normals);
  const auto back = load_ply_points(path.string());
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(norm(back[i] - pts[i]) <= 1e-8);

  // positions can be pulled straight out of a gaussian cloud file
  Rng rng(4);
  GaussianCloud cloud;
  for (int i = 0; i < 5; ++i) cloud.gaussians.push_back(random_gaussian(rng));
  const auto gpath = temp_file("points_from_cloud.ply");
  save_ply_cloud(cloud, gpath.string());
  const auto positions = load_ply_points(gpath.string());
  REQUIRE(positions.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(norm(positions[i] - cloud.gaussians[i].position) <= 1e-8);
}
