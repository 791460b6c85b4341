#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kgas/vec.hpp"

namespace kgas {

struct UidParams {
  int k = 16;
  double threshold_deg = 30.0;
  bool folded = true;  // compare undirected normals: angle folded to [0, 90]

  void validate(std::size_t point_count) const;
};

struct UidPointResult {
  Vec3 normal{0.0, 0.0, 1.0};
  double max_angle_deg = 0.0;
  bool degenerate = false;
  bool flagged = false;
};

struct UidReport {
  UidParams params;
  std::vector<UidPointResult> points;
  std::vector<std::size_t> flagged;  // ascending indices

  std::size_t flagged_count() const { return flagged.size(); }
};

// Exact k nearest neighbors (self excluded), ordered by squared distance
// with index tie-break. Brute force below 512 points, uniform-grid spatial
// hash above; both produce identical neighbor sets.
std::vector<std::vector<std::size_t>> knn(const std::vector<Vec3>& points, int k);

// Unit normal of a neighborhood (the point plus its neighbors): eigenvector
// of the smallest eigenvalue of the sample covariance (1/(m-1)), sign fixed
// so the largest-magnitude component is positive. degenerate is set when
// the neighborhood is numerically collinear or coincident, in which case
// the normal direction is not meaningful.
Vec3 pca_normal(const std::vector<Vec3>& points,
                const std::vector<std::size_t>& neighborhood, std::size_t self,
                bool& degenerate);

// Angle between normals in degrees; folded compares undirected lines,
// min(theta, 180 - theta).
double normal_angle_deg(const Vec3& a, const Vec3& b, bool folded);

// Flags points whose neighborhood normals disagree: a point is flagged when
// the max (folded) angle to any neighbor normal exceeds the threshold.
// Degenerate points are never flagged and do not contribute angles.
UidReport uid_detect(const std::vector<Vec3>& points, const UidParams& params);

// Plain-text report: parameters, flagged index list, then one line per
// point with its max angle (degrees, 4 decimals) and degeneracy marker.
void save_uid_report(const UidReport& report, const std::string& path);

}  // namespace kgas
