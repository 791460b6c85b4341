#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kgas/error.hpp"
#include "kgas/rng.hpp"
#include "kgas/uid.hpp"

using namespace kgas;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double span) {
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(Vec3{rng.uniform(-span, span), rng.uniform(-span, span),
                       rng.uniform(-span, span)});
  return pts;
}

// brute-force reference with the same (distance, index) ordering
std::vector<std::vector<std::size_t>> knn_ref(const std::vector<Vec3>& pts, int k) {
  std::vector<std::vector<std::size_t>> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      const Vec3 diff = pts[i] - pts[j];
      d.emplace_back(dot(diff, diff), j);
    }
    std::sort(d.begin(), d.end());
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
    for (std::size_t t = 0; t < take; ++t) out[i].push_back(d[t].second);
  }
  return out;
}

}  // namespace

TEST_CASE("grid-accelerated neighbors equal brute force above the cutover") {
  // 700 points forces the spatial hash; compare against plain sort
  for (std::uint64_t seed : {1ull, 2ull}) {
    const auto pts = random_points(700, seed, 1.0);
    const auto fast = knn(pts, 12);
    const auto ref = knn_ref(pts, 12);
    REQUIRE(fast.size() == ref.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      REQUIRE(fast[i].size() == ref[i].size());
      for (std::size_t t = 0; t < fast[i].size(); ++t)
        CHECK(fast[i][t] == ref[i][t]);
    }
  }

  // clustered distribution stresses nonuniform cell occupancy
  auto clustered = random_points(400, 3, 0.05);
  const auto far_cluster = random_points(300, 4, 0.08);
  for (const auto& p : far_cluster) clustered.push_back(p + Vec3{3.0, -2.0, 1.0});
  const auto fast = knn(clustered, 9);
  const auto ref = knn_ref(clustered, 9);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    REQUIRE(fast[i].size() == ref[i].size());
    for (std::size_t t = 0; t < fast[i].size(); ++t)
      CHECK(fast[i][t] == ref[i][t]);
  }
}

TEST_CASE("brute-force path matches the reference below the cutover") {
  const auto pts = random_points(300, 9, 2.0);
  const auto fast = knn(pts, 16);
  const auto ref = knn_ref(pts, 16);
  for (std::size_t i = 0; i < fast.size(); ++i)
    for (std::size_t t = 0; t < fast[i].size(); ++t)
      CHECK(fast[i][t] == ref[i][t]);
}

TEST_CASE("undersized point sets are rejected") {
  const auto pts = random_points(5, 12, 1.0);
  CHECK_THROWS_AS(knn(pts, 16), ValidationError);
  CHECK_NOTHROW(knn(pts, 4));
}

TEST_CASE("PCA normals recover a plane and flag collinear sets as degenerate") {
  // slanted plane z = 0.3 x - 0.2 y
  std::vector<Vec3> pts;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      const double x = i * 0.1, y = j * 0.1;
      pts.push_back(Vec3{x, y, 0.3 * x - 0.2 * y});
    }
  const auto nb = knn(pts, 8);
  const Vec3 expect = normalized(Vec3{-0.3, 0.2, 1.0});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool degenerate = true;
    const Vec3 n = pca_normal(pts, nb[i], i, degenerate);
    CHECK_FALSE(degenerate);
    CHECK(std::abs(std::abs(dot(n, expect)) - 1.0) <= 1e-9);
  }

  // collinear points: no meaningful normal
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.push_back(Vec3{0.1 * i, 0.2 * i, -0.05 * i});
  const auto line_nb = knn(line, 4);
  bool degenerate = false;
  pca_normal(line, line_nb[5], 5, degenerate);
  CHECK(degenerate);
}

TEST_CASE("normal angles fold to undirected lines when asked") {
  const Vec3 a{0.0, 0.0, 1.0};
  const double c30 = std::cos(30.0 * std::numbers::pi / 180.0);
  const double s30 = std::sin(30.0 * std::numbers::pi / 180.0);
  const Vec3 b{s30, 0.0, c30};
  CHECK(normal_angle_deg(a, b, false) == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(normal_angle_deg(a, -1.0 * b, false) == doctest::Approx(150.0).epsilon(1e-10));
  CHECK(normal_angle_deg(a, -1.0 * b, true) == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(normal_angle_deg(a, a, true) == 0.0);
}

TEST_CASE("flat grids produce zero flags") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) pts.push_back(Vec3{0.05 * i, 0.05 * j, 0.0});
  UidParams params;
  params.k = 8;
  params.threshold_deg = 30.0;
  const UidReport report = uid_detect(pts, params);
  CHECK(report.flagged_count() == 0);
  for (const auto& p : report.points) CHECK_FALSE(p.flagged);
}

TEST_CASE("detection parameters validate against the point count") {
  const auto pts = random_points(10, 5, 1.0);
  UidParams params;
  params.k = 0;
  CHECK_THROWS_AS(uid_detect(pts, params), ValidationError);
  params.k = 8;
  params.threshold_deg = -1.0;
  CHECK_THROWS_AS(uid_detect(pts, params), ValidationError);
  CHECK_THROWS_AS(uid_detect({}, UidParams{}), ValidationError);
}

TEST_CASE("reports serialize flags, angles and degeneracy markers") {
  // a fold sharp enough to flag the middle row
  std::vector<Vec3> pts;
  for (int i = 0; i < 12; ++i)
    for (int j = -4; j <= 4; ++j) {
      const double u = 0.05 * i, v = 0.1 * j;
      if (j <= 0) pts.push_back(Vec3{u, v, 0.0});
      else pts.push_back(Vec3{u, v * std::cos(2.0), v * std::sin(2.0)});
    }
  UidParams params;
  params.k = 8;
  const UidReport report = uid_detect(pts, params);
  CHECK(report.flagged_count() > 0);

  const auto dir = std::filesystem::temp_directory_path() / "kgas_tests";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "uid_report.txt").string();
  save_uid_report(report, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("flagged") != std::string::npos);
  CHECK(text.find("threshold_deg") != std::string::npos);
}
