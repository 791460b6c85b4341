#include "kgas/fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "kgas/error.hpp"

namespace kgas {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kMaxSingular = 500.0;

struct GlRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n. Rules are cached; the
// iteration converges to machine precision in a handful of steps.
const GlRule& gl_rule(int n) {
  static std::map<int, GlRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GlRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  auto [pos, inserted] = cache.emplace(n, std::move(rule));
  (void)inserted;
  return pos->second;
}

struct NormMoments {
  double log_c = 0.0;
  Vec3 d{0.0, 0.0, 0.0};  // E[R_ii], the partials dlog c/ds_i
};

// One quadrature level: ZXZ Euler angles alpha, gamma on [0, 2pi),
// beta on [0, pi], Haar weight sin(beta) / (8 pi^2). The diagonal of
// R(alpha, beta, gamma) is
//   R11 = ca*cg - sa*cb*sg, R22 = ca*cb*cg - sa*sg, R33 = cb.
// exp(s1+s2+s3), the value at the mode, is factored out for stability.
NormMoments quad_level(const Vec3& s, int n) {
  const GlRule& rule = gl_rule(n);
  std::vector<double> ca(n), sa(n), cg(n), sg(n), cb(n), sb(n), wb(n);
  for (int i = 0; i < n; ++i) {
    double alpha = kPi * (rule.nodes[i] + 1.0);  // [0, 2pi)
    ca[i] = std::cos(alpha);
    sa[i] = std::sin(alpha);
    cg[i] = ca[i];
    sg[i] = sa[i];
    double beta = 0.5 * kPi * (rule.nodes[i] + 1.0);  // [0, pi]
    cb[i] = std::cos(beta);
    sb[i] = std::sin(beta);
    wb[i] = rule.weights[i];
  }
  double m = s.x + s.y + s.z;
  double z = 0.0, z1 = 0.0, z2 = 0.0, z3 = 0.0;
  for (int ib = 0; ib < n; ++ib) {
    double cbv = cb[ib];
    double base = s.z * cbv - m;
    double haar = sb[ib] * wb[ib];
    for (int ia = 0; ia < n; ++ia) {
      double cav = ca[ia], sav = sa[ia];
      // tr(S R) = A*cg + B*sg + s3*cb with:
      double a = cav * (s.x + s.y * cbv);
      double b = -sav * (s.x * cbv + s.y);
      double wab = haar * wb[ia];
      for (int ig = 0; ig < n; ++ig) {
        double e = std::exp(a * cg[ig] + b * sg[ig] + base) * (wab * wb[ig]);
        double r11 = cav * cg[ig] - sav * cbv * sg[ig];
        double r22 = cav * cbv * cg[ig] - sav * sg[ig];
        z += e;
        z1 += e * r11;
        z2 += e * r22;
        z3 += e * cbv;
      }
    }
  }
  // Jacobians: alpha and gamma ranges scale by pi, beta by pi/2; divide by
  // the Haar volume 8 pi^2. The scale cancels in the moment ratios.
  double scale = kPi * kPi * (0.5 * kPi) / (8.0 * kPi * kPi);
  NormMoments out;
  out.log_c = m + std::log(z * scale);
  out.d = Vec3{z1 / z, z2 / z, z3 / z};
  return out;
}

NormMoments norm_moments_uncached(const Vec3& s) {
  if (std::max({std::abs(s.x), std::abs(s.y), std::abs(s.z)}) > kMaxSingular)
    throw NumericError("matrix-Fisher normalizer overflow guard: singular value exceeds 500");
  if (s.x == 0.0 && s.y == 0.0 && s.z == 0.0)
    return NormMoments{0.0, {0.0, 0.0, 0.0}};
  static const int kLevels[] = {16, 24, 32, 48, 64, 96, 128, 192, 256, 384};
  NormMoments prev = quad_level(s, kLevels[0]);
  for (std::size_t li = 1; li < std::size(kLevels); ++li) {
    NormMoments cur = quad_level(s, kLevels[li]);
    double rel = std::abs(cur.log_c - prev.log_c) /
                 std::max(1.0, std::abs(cur.log_c));
    if (rel <= 1e-7) return cur;
    prev = cur;
  }
  return prev;
}

const NormMoments& norm_moments(const Vec3& s) {
  static std::map<std::array<double, 3>, NormMoments> cache;
  static std::mutex mu;
  std::array<double, 3> key = {s.x, s.y, s.z};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  NormMoments value = norm_moments_uncached(s);
  std::lock_guard<std::mutex> lock(mu);
  auto [pos, inserted] = cache.emplace(key, value);
  (void)inserted;
  return pos->second;
}

}  // namespace

FisherParams FisherParams::from(const Mat3& f) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!std::isfinite(f[i][j]))
        throw ValidationError("Fisher parameter matrix has non-finite entries");
  return FisherParams{f, proper_svd(f)};
}

double log_normalizer(const FisherParams& p) { return norm_moments(p.svd.s).log_c; }

Mat3 expected_rotation(const FisherParams& p) {
  const NormMoments& nm = norm_moments(p.svd.s);
  return p.svd.u * Mat3::diag(nm.d) * transpose(p.svd.v);
}

double density(const FisherParams& p, const RotationMatrix& r) {
  double t = trace(transpose(p.f) * r.m);
  return std::exp(t - log_normalizer(p));
}

RotationMatrix mode(const FisherParams& p) {
  if (p.svd.s.x == 0.0) return RotationMatrix{};  // F = 0: identity by convention
  return RotationMatrix{p.svd.u * transpose(p.svd.v)};
}

double nll(const FisherParams& p, const RotationMatrix& r) {
  return log_normalizer(p) - trace(transpose(p.f) * r.m);
}

Mat3 nll_grad(const FisherParams& p, const RotationMatrix& r) {
  return expected_rotation(p) - r.m;
}

std::vector<RotationMatrix> sample(const FisherParams& p, std::size_t n,
                                   std::uint64_t seed) {
  std::vector<RotationMatrix> out;
  out.reserve(n);
  if (n == 0) return out;
  Rng rng(seed);
  // Envelope: density / density(mode); log acceptance = tr(F^T R) - m.
  double m = p.svd.s.x + p.svd.s.y + p.svd.s.z;
  Mat3 ft = transpose(p.f);
  constexpr std::uint64_t kProbe = 1'000'000;
  std::uint64_t proposals = 0, accepted = 0;
  while (out.size() < n) {
    RotationMatrix r = rng.uniform_rotation();
    ++proposals;
    double log_a = trace(ft * r.m) - m;
    double u = rng.uniform();
    if (std::log(std::max(u, 1e-300)) <= log_a) {
      out.push_back(r);
      ++accepted;
    }
    if (proposals == kProbe && accepted == 0)
      throw NumericError(
          "rejection sampler acceptance rate below 1e-6; keep per-axis concentration below ~200");
  }
  return out;
}

Vec3 concentration_profile(const FisherParams& p) {
  const Vec3& s = p.svd.s;
  return {s.y + s.z, s.z + s.x, s.x + s.y};
}

double marginal_angle_density(const FisherParams& p, int axis, double theta) {
  if (axis < 0 || axis > 2) throw ValidationError("axis index must be 0, 1 or 2");
  double kappa = concentration_profile(p)[axis];
  return std::exp(kappa * std::cos(theta) - std::log(kTwoPi) - log_bessel_i0(kappa));
}

double principal_axis_angle(const FisherParams& p, const RotationMatrix& r,
                            int axis) {
  if (axis < 0 || axis > 2) throw ValidationError("axis index must be 0, 1 or 2");
  Mat3 q = transpose(p.svd.u) * r.m * p.svd.v;
  int i = axis, j = (axis + 1) % 3, k = (axis + 2) % 3;
  (void)i;
  // For Q = exp(theta * hat(e_i)): Q[k][j] - Q[j][k] = 2 sin(theta),
  // Q[j][j] + Q[k][k] = 2 cos(theta).
  return std::atan2(q[k][j] - q[j][k], q[j][j] + q[k][k]);
}

double log_bessel_i0(double x) {
  x = std::abs(x);
  if (x <= 50.0) return std::log(std::cyl_bessel_i(0.0, x));
  // Asymptotic expansion I_0(x) ~ e^x / sqrt(2 pi x) * (1 + 1/(8x) + ...).
  double inv = 1.0 / x;
  double series = 1.0 + inv * (0.125 + inv * (0.0703125 + inv * 0.0732421875));
  return x - 0.5 * std::log(kTwoPi * x) + std::log(series);
}

double fit_von_mises_concentration(const std::vector<double>& angles) {
  if (angles.empty()) throw ValidationError("cannot fit concentration to an empty angle set");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  double rbar = std::sqrt(c * c + s * s) / static_cast<double>(angles.size());
  if (rbar >= 1.0) return 1e4;
  if (rbar <= 0.0) return 0.0;
  // A(kappa) = I_1 / I_0 is monotone; invert by bisection.
  auto ratio = [](double kappa) {
    if (kappa < 1e-12) return 0.0;
    if (kappa <= 50.0)
      return std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
    double inv = 1.0 / kappa;
    return 1.0 - 0.5 * inv - 0.125 * inv * inv - 0.125 * inv * inv * inv;
  };
  double lo = 1e-8, hi = 1e4;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ratio(mid) < rbar)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace kgas
