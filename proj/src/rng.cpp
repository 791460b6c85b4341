#include "kgas/rng.hpp"

#include <cmath>

namespace kgas {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Mat3 quat_rows(double w, double x, double y, double z) {
  Mat3 m;
  m[0][0] = 1.0 - 2.0 * (y * y + z * z);
  m[0][1] = 2.0 * (x * y - w * z);
  m[0][2] = 2.0 * (x * z + w * y);
  m[1][0] = 2.0 * (x * y + w * z);
  m[1][1] = 1.0 - 2.0 * (x * x + z * z);
  m[1][2] = 2.0 * (y * z - w * x);
  m[2][0] = 2.0 * (x * z - w * y);
  m[2][1] = 2.0 * (y * z + w * x);
  m[2][2] = 1.0 - 2.0 * (x * x + y * y);
  return m;
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller; u1 in (0, 1] to keep the log finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = kTwoPi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

RotationMatrix Rng::uniform_rotation() {
  double u1 = uniform(), u2 = uniform(), u3 = uniform();
  double sq1 = std::sqrt(1.0 - u1), sq2 = std::sqrt(u1);
  double w = sq2 * std::cos(kTwoPi * u3);
  double x = sq1 * std::sin(kTwoPi * u2);
  double y = sq1 * std::cos(kTwoPi * u2);
  double z = sq2 * std::sin(kTwoPi * u3);
  return RotationMatrix{quat_rows(w, x, y, z)};
}

Rng Rng::fork(std::uint64_t stream) const {
  // Derive a child seed by hashing (state, stream); streams are disjoint
  // with overwhelming probability and fully reproducible.
  std::uint64_t s = state_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  std::uint64_t mixed = splitmix64(s);
  return Rng(mixed);
}

Mat3 quat_to_mat(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  return quat_rows(w, x, y, z);
}

void mat_to_quat(const Mat3& m, double& w, double& x, double& y, double& z) {
  double t = trace(m);
  if (t > 0.0) {
    double r = std::sqrt(1.0 + t);
    double s = 0.5 / r;
    w = 0.5 * r;
    x = (m[2][1] - m[1][2]) * s;
    y = (m[0][2] - m[2][0]) * s;
    z = (m[1][0] - m[0][1]) * s;
  } else {
    int i = 0;
    if (m[1][1] > m[0][0]) i = 1;
    if (m[2][2] > m[i][i]) i = 2;
    int j = (i + 1) % 3, k = (i + 2) % 3;
    double r = std::sqrt(1.0 + m[i][i] - m[j][j] - m[k][k]);
    double s = 0.5 / r;
    double q[3];
    q[i] = 0.5 * r;
    q[j] = (m[j][i] + m[i][j]) * s;
    q[k] = (m[k][i] + m[i][k]) * s;
    w = (m[k][j] - m[j][k]) * s;
    x = q[0]; y = q[1]; z = q[2];
  }
  if (w < 0.0) { w = -w; x = -x; y = -y; z = -z; }
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
}

namespace {

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

}  // namespace

std::vector<RotationMatrix> so3_quasi_grid(std::size_t n) {
  std::vector<RotationMatrix> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u1 = halton(i + 1, 2);
    double u2 = halton(i + 1, 3);
    double u3 = halton(i + 1, 5);
    double sq1 = std::sqrt(1.0 - u1), sq2 = std::sqrt(u1);
    double w = sq2 * std::cos(kTwoPi * u3);
    double x = sq1 * std::sin(kTwoPi * u2);
    double y = sq1 * std::cos(kTwoPi * u2);
    double z = sq2 * std::sin(kTwoPi * u3);
    grid.push_back(RotationMatrix{quat_rows(w, x, y, z)});
  }
  return grid;
}

}  // namespace kgas
