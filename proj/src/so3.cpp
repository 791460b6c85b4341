#include "kgas/so3.hpp"

#include <algorithm>
#include <cmath>

#include "kgas/error.hpp"

namespace kgas {

SymEig3 sym_eig3(const Mat3& a_in) {
  Mat3 a = a_in;
  Mat3 v = Mat3::identity();
  constexpr int kMaxSweeps = 60;
  constexpr double kTol = 1e-13;
  double scale = std::max(max_abs(a), 1e-300);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    if (off <= kTol * scale) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double apq = a[p][q];
        if (std::abs(apq) <= kTol * scale * 1e-2) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  // Sort eigenpairs by descending eigenvalue, ties kept in sweep order.
  std::array<int, 3> idx = {0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return a[i][i] > a[j][j]; });
  SymEig3 out;
  for (int j = 0; j < 3; ++j) {
    out.values[j] = a[idx[j]][idx[j]];
    Vec3 col{v[0][idx[j]], v[1][idx[j]], v[2][idx[j]]};
    // Fix sign: largest-magnitude component positive.
    int big = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(col[k]) > std::abs(col[big])) big = k;
    if (col[big] < 0.0) col = -col;
    for (int k = 0; k < 3; ++k) out.vectors[k][j] = col[k];
  }
  return out;
}

RotationMatrix RotationMatrix::from(const Mat3& m) {
  RotationMatrix r{m};
  if (!r.valid())
    throw ValidationError("matrix is not a rotation: orthogonality or det(+1) violated beyond 1e-9");
  return r;
}

bool RotationMatrix::valid(double tol) const {
  Mat3 g = transpose(m) * m;
  Mat3 dev = g - Mat3::identity();
  return max_abs(dev) <= tol && std::abs(det(m) - 1.0) <= tol;
}

Mat3 hat(const Vec3& v) {
  Mat3 a;
  a[0][0] = 0.0;   a[0][1] = -v.z; a[0][2] = v.y;
  a[1][0] = v.z;   a[1][1] = 0.0;  a[1][2] = -v.x;
  a[2][0] = -v.y;  a[2][1] = v.x;  a[2][2] = 0.0;
  return a;
}

Vec3 vee(const Mat3& a) {
  return {0.5 * (a[2][1] - a[1][2]), 0.5 * (a[0][2] - a[2][0]),
          0.5 * (a[1][0] - a[0][1])};
}

RotationMatrix exp_so3(const AxisAngle& aa) {
  double n = norm(aa.axis);
  if (n == 0.0 || aa.angle == 0.0) return RotationMatrix{};
  Vec3 u = aa.axis / n;
  double c = std::cos(aa.angle), s = std::sin(aa.angle);
  Mat3 k = hat(u);
  Mat3 r = Mat3::identity() + s * k + (1.0 - c) * (k * k);
  return RotationMatrix{r};
}

RotationMatrix exp_so3(const Vec3& w) {
  double angle = norm(w);
  if (angle == 0.0) return RotationMatrix{};
  return exp_so3(AxisAngle{w / angle, angle});
}

AxisAngle log_so3(const RotationMatrix& r) {
  const Mat3& m = r.m;
  Vec3 w = vee(m);           // = sin(angle) * axis
  double s = norm(w);
  double c = 0.5 * (trace(m) - 1.0);
  c = std::clamp(c, -1.0, 1.0);
  double angle = std::atan2(s, c);
  if (angle < 1e-12) return AxisAngle{{1.0, 0.0, 0.0}, 0.0};
  // Away from pi the skew part determines the axis; its absolute error stays
  // ~eps, so even tiny angles come out with tiny absolute error.
  if (c > 0.0 || s > 1e-4) return AxisAngle{w / s, angle};
  // Near pi sin(angle) vanishes but the symmetric part
  // (R + R^T) / 2 = cos I + (1 - cos) nn^T stays well conditioned
  // (1 - cos ~ 2). Read nn^T off it column-wise.
  const double one_minus_c = 1.0 - c;
  Mat3 nnt;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      nnt[i][j] =
          (0.5 * (m[i][j] + m[j][i]) - (i == j ? c : 0.0)) / one_minus_c;
  std::size_t big = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (nnt[k][k] > nnt[big][big]) big = k;
  Vec3 axis;
  axis[big] = std::sqrt(std::max(nnt[big][big], 0.0));
  for (std::size_t k = 0; k < 3; ++k)
    if (k != big) axis[k] = nnt[big][k] / axis[big];
  axis = normalized(axis);
  if (s > 1e-10) {
    // The skew part still carries the true sign.
    if (dot(axis, w) < 0.0) axis = -axis;
  } else {
    std::size_t top = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (std::abs(axis[k]) > std::abs(axis[top])) top = k;
    if (axis[top] < 0.0) axis = -axis;
  }
  return AxisAngle{axis, angle};
}

namespace {

// Column 2-norm squared of column j.
inline double col_sq(const Mat3& b, int j) {
  return b[0][j] * b[0][j] + b[1][j] * b[1][j] + b[2][j] * b[2][j];
}

inline double col_dot(const Mat3& b, int p, int q) {
  return b[0][p] * b[0][q] + b[1][p] * b[1][q] + b[2][p] * b[2][q];
}

}  // namespace

ProperSvd proper_svd(const Mat3& f) {
  constexpr double kTol = 1e-12;
  constexpr int kMaxSweeps = 60;
  Mat3 b = f;
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double app = col_sq(b, p);
        double aqq = col_sq(b, q);
        double apq = col_dot(b, p, q);
        if (std::abs(apq) <= kTol * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        double zeta = (aqq - app) / (2.0 * apq);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int k = 0; k < 3; ++k) {
          double bkp = b[k][p], bkq = b[k][q];
          b[k][p] = c * bkp - s * bkq;
          b[k][q] = s * bkp + c * bkq;
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
    if (!rotated) break;
  }

  // Singular values are the column norms of B; sort descending.
  std::array<double, 3> sig = {std::sqrt(col_sq(b, 0)), std::sqrt(col_sq(b, 1)),
                               std::sqrt(col_sq(b, 2))};
  std::array<int, 3> idx = {0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return sig[i] > sig[j]; });

  Mat3 u;
  Mat3 vs;
  Vec3 s;
  for (int j = 0; j < 3; ++j) {
    s[j] = sig[idx[j]];
    for (int k = 0; k < 3; ++k) vs[k][j] = v[k][idx[j]];
  }
  // U columns: normalized columns of B; rebuild degenerate directions
  // orthogonally so U stays a proper orthogonal frame at any rank.
  double smax = std::max(s[0], 1e-300);
  for (int j = 0; j < 3; ++j) {
    Vec3 col{b[0][idx[j]], b[1][idx[j]], b[2][idx[j]]};
    if (s[j] > 1e-14 * smax && s[j] > 0.0) {
      col = col / s[j];
    } else if (j == 1) {
      // complete the frame against the least-aligned basis vector; the
      // projection (rather than a cross product) keeps the zero matrix
      // mapping to exactly U = I
      Vec3 u0{u[0][0], u[1][0], u[2][0]};
      int small = 0;
      for (int k = 1; k < 3; ++k)
        if (std::abs(u0[k]) < std::abs(u0[small])) small = k;
      Vec3 e{0.0, 0.0, 0.0};
      e[small] = 1.0;
      col = normalized(e - u0 * dot(u0, e));
    } else if (j == 2) {
      Vec3 u0{u[0][0], u[1][0], u[2][0]};
      Vec3 u1{u[0][1], u[1][1], u[2][1]};
      col = cross(u0, u1);
    } else {
      col = {1.0, 0.0, 0.0};
    }
    for (int k = 0; k < 3; ++k) u[k][j] = col[k];
  }

  // Move reflections into the sign of s3 so both factors are proper.
  double du = det(u) < 0.0 ? -1.0 : 1.0;
  double dv = det(vs) < 0.0 ? -1.0 : 1.0;
  for (int k = 0; k < 3; ++k) {
    u[k][2] *= du;
    vs[k][2] *= dv;
  }
  s[2] *= du * dv;
  return ProperSvd{u, s, vs};
}

}  // namespace kgas
