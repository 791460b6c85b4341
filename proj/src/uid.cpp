#include "kgas/uid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "kgas/error.hpp"
#include "kgas/parallel.hpp"
#include "kgas/so3.hpp"

namespace kgas {

namespace {

constexpr double kRadToDeg = 57.295779513082320876798154814105;
constexpr std::size_t kBruteForceLimit = 512;

using Neighbor = std::pair<double, std::size_t>;  // (squared distance, index)

std::vector<std::size_t> brute_knn_one(const std::vector<Vec3>& pts,
                                       std::size_t i, std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(pts.size() - 1);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    Vec3 d = pts[j] - pts[i];
    all.emplace_back(dot(d, d), j);
  }
  std::partial_sort(all.begin(), all.begin() + k, all.end());
  std::vector<std::size_t> out(k);
  for (std::size_t n = 0; n < k; ++n) out[n] = all[n].second;
  return out;
}

struct Grid {
  double cell = 1.0;
  Vec3 origin;
  int nx = 1, ny = 1, nz = 1;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;

  std::uint64_t key(int cx, int cy, int cz) const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 42) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy) & 0x1FFFFF) << 21) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cz) & 0x1FFFFF));
  }

  void coords(const Vec3& p, int& cx, int& cy, int& cz) const {
    cx = std::clamp(static_cast<int>((p.x - origin.x) / cell), 0, nx - 1);
    cy = std::clamp(static_cast<int>((p.y - origin.y) / cell), 0, ny - 1);
    cz = std::clamp(static_cast<int>((p.z - origin.z) / cell), 0, nz - 1);
  }
};

Grid build_grid(const std::vector<Vec3>& pts, std::size_t k) {
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  Vec3 ext = hi - lo;
  // Aim for roughly k points per cell so a small ring usually suffices.
  // Axes with (near-)zero extent must not enter the density estimate, or a
  // flat sheet would get cells far finer than its point spacing and the
  // ring search would crawl through an enormous lattice.
  const double max_ext = std::max({ext.x, ext.y, ext.z});
  double cell = 1.0;
  if (max_ext > 0.0) {
    const double floor_ext = 1e-9 * max_ext;
    double measure = 1.0;
    int dims = 0;
    for (double e : {ext.x, ext.y, ext.z}) {
      if (e > floor_ext) {
        measure *= e;
        ++dims;
      }
    }
    cell = std::pow(
        measure * static_cast<double>(k) / static_cast<double>(pts.size()),
        1.0 / static_cast<double>(dims));
    cell = std::max(cell, floor_ext);
  }
  Grid g;
  g.cell = cell;
  g.origin = lo;
  g.nx = std::max(1, static_cast<int>(ext.x / cell) + 1);
  g.ny = std::max(1, static_cast<int>(ext.y / cell) + 1);
  g.nz = std::max(1, static_cast<int>(ext.z / cell) + 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int cx, cy, cz;
    g.coords(pts[i], cx, cy, cz);
    g.cells[g.key(cx, cy, cz)].push_back(i);
  }
  return g;
}

std::vector<std::size_t> grid_knn_one(const std::vector<Vec3>& pts, const Grid& g,
                                      std::size_t i, std::size_t k) {
  int cx, cy, cz;
  g.coords(pts[i], cx, cy, cz);
  std::vector<Neighbor> best;  // kept sorted ascending, at most k entries
  best.reserve(k + 1);
  auto consider = [&](std::size_t j) {
    if (j == i) return;
    Vec3 d = pts[j] - pts[i];
    Neighbor cand{dot(d, d), j};
    if (best.size() == k && !(cand < best.back())) return;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > k) best.pop_back();
  };
  int max_ring = std::max({g.nx, g.ny, g.nz});
  for (int r = 0; r <= max_ring; ++r) {
    // Completed rings up to r-1 guarantee every unvisited point is at least
    // (r-1) * cell away; stop once the kth best is closer than that bound.
    if (best.size() == k) {
      double bound = static_cast<double>(r - 1) * g.cell;
      if (bound > 0.0 && best.back().first <= bound * bound) break;
    }
    // enumerate the shell of radius r clipped to the grid box, so thin
    // grids (nz or ny of 1) do not pay for a full cube of offsets
    bool any_cell = false;
    const int x0 = std::max(cx - r, 0), x1 = std::min(cx + r, g.nx - 1);
    const int y0 = std::max(cy - r, 0), y1 = std::min(cy + r, g.ny - 1);
    const int z0 = std::max(cz - r, 0), z1 = std::min(cz + r, g.nz - 1);
    auto visit = [&](int x, int y, int z) {
      any_cell = true;
      auto it = g.cells.find(g.key(x, y, z));
      if (it == g.cells.end()) return;
      for (std::size_t j : it->second) consider(j);
    };
    for (int x = x0; x <= x1; ++x) {
      for (int y = y0; y <= y1; ++y) {
        if (std::max(std::abs(x - cx), std::abs(y - cy)) == r) {
          for (int z = z0; z <= z1; ++z) visit(x, y, z);
        } else {
          if (cz - r >= z0) visit(x, y, cz - r);
          if (cz + r <= z1 && r > 0) visit(x, y, cz + r);
        }
      }
    }
    if (!any_cell && r > 0 && best.size() == k) break;
  }
  std::vector<std::size_t> out(best.size());
  for (std::size_t n = 0; n < best.size(); ++n) out[n] = best[n].second;
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> knn(const std::vector<Vec3>& points, int k) {
  if (k < 1) throw ValidationError("knn: k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k) + 1)
    throw ValidationError("knn: need at least k+1 points");
  std::size_t kk = static_cast<std::size_t>(k);
  std::vector<std::vector<std::size_t>> out(points.size());
  if (points.size() < kBruteForceLimit) {
    parallel_for(points.size(),
                 [&](std::size_t i) { out[i] = brute_knn_one(points, i, kk); });
  } else {
    Grid g = build_grid(points, kk);
    parallel_for(points.size(),
                 [&](std::size_t i) { out[i] = grid_knn_one(points, g, i, kk); });
  }
  return out;
}

Vec3 pca_normal(const std::vector<Vec3>& points,
                const std::vector<std::size_t>& neighborhood, std::size_t self,
                bool& degenerate) {
  // Sample covariance over the point and its neighbors.
  std::size_t m = neighborhood.size() + 1;
  if (m < 3) throw ValidationError("pca normal: need at least 2 neighbors");
  Vec3 mean = points[self];
  for (std::size_t j : neighborhood) mean += points[j];
  mean = mean / static_cast<double>(m);
  Mat3 cov;
  auto accumulate = [&](const Vec3& p) {
    Vec3 d = p - mean;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) cov[a][b] += d[a] * d[b];
  };
  accumulate(points[self]);
  for (std::size_t j : neighborhood) accumulate(points[j]);
  cov = cov * (1.0 / static_cast<double>(m - 1));

  SymEig3 eig = sym_eig3(cov);
  // Collinear or coincident neighborhoods have no meaningful normal: the
  // two smallest eigenvalues vanish together.
  double l0 = std::max(eig.values[0], 0.0);
  double l1 = std::max(eig.values[1], 0.0);
  degenerate = l0 <= 1e-24 || l1 <= 1e-9 * l0;
  return {eig.vectors[0][2], eig.vectors[1][2], eig.vectors[2][2]};
}

double normal_angle_deg(const Vec3& a, const Vec3& b, bool folded) {
  double theta = std::atan2(norm(cross(a, b)), dot(a, b)) * kRadToDeg;
  if (folded) theta = std::min(theta, 180.0 - theta);
  return theta;
}

void UidParams::validate(std::size_t point_count) const {
  if (k < 2) throw ValidationError("deformation detection: k must be at least 2");
  if (!(threshold_deg > 0.0 && threshold_deg < 180.0))
    throw ValidationError("deformation detection: threshold must lie in (0, 180) degrees");
  if (point_count < static_cast<std::size_t>(k) + 1)
    throw ValidationError("deformation detection: need at least k+1 points");
}

UidReport uid_detect(const std::vector<Vec3>& points, const UidParams& params) {
  params.validate(points.size());
  UidReport report;
  report.params = params;
  report.points.resize(points.size());

  auto neighbors = knn(points, params.k);
  parallel_for(points.size(), [&](std::size_t i) {
    bool degenerate = false;
    Vec3 n = pca_normal(points, neighbors[i], i, degenerate);
    report.points[i].normal = n;
    report.points[i].degenerate = degenerate;
  });

  parallel_for(points.size(), [&](std::size_t i) {
    auto& res = report.points[i];
    if (res.degenerate) return;
    double max_angle = 0.0;
    for (std::size_t j : neighbors[i]) {
      if (report.points[j].degenerate) continue;
      max_angle = std::max(max_angle,
                           normal_angle_deg(res.normal, report.points[j].normal,
                                            params.folded));
    }
    res.max_angle_deg = max_angle;
    res.flagged = max_angle > params.threshold_deg;
  });

  for (std::size_t i = 0; i < report.points.size(); ++i)
    if (report.points[i].flagged) report.flagged.push_back(i);
  return report;
}

void save_uid_report(const UidReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write report file: " + path);
  out << "# surface deformation report\n";
  out << "points = " << report.points.size() << "\n";
  out << "k = " << report.params.k << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", report.params.threshold_deg);
  out << "threshold_deg = " << buf << "\n";
  out << "folded = " << (report.params.folded ? 1 : 0) << "\n";
  out << "flagged_count = " << report.flagged.size() << "\n";
  out << "flagged =";
  for (std::size_t i : report.flagged) out << ' ' << i;
  out << "\n";
  out << "# index max_angle_deg degenerate\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f", report.points[i].max_angle_deg);
    out << i << ' ' << buf << ' ' << (report.points[i].degenerate ? 1 : 0) << "\n";
  }
}

}  // namespace kgas
