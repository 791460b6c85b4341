#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "kgas/error.hpp"
#include "kgas/fisher.hpp"
#include "kgas/rng.hpp"
#include "oracles.hpp"

using namespace kgas;

namespace {

Mat3 random_mat(Rng& rng, double lo, double hi) {
  Mat3 m;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m[i][j] = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("zero parameters normalize to exactly one") {
  const FisherParams p = FisherParams::from(Mat3{});
  CHECK(log_normalizer(p) == 0.0);
  CHECK(frobenius_norm(mode(p).m - Mat3::identity()) == 0.0);
  CHECK(frobenius_norm(expected_rotation(p)) == 0.0);
}

TEST_CASE("isotropic normalizer matches the 1D angle-marginal integral") {
  for (double kappa : {0.25, 1.0, 3.0, 5.0, 12.0}) {
    const FisherParams p = FisherParams::from(Mat3::identity() * kappa);
    const double ours = log_normalizer(p);
    const double ref = oracles::log_normalizer_isotropic_ref(kappa);
    CHECK(ours == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("normalizer and moments reproduce frozen references") {
  // values computed independently with 50-digit arithmetic
  const FisherParams iso = FisherParams::from(Mat3::diag(5.0, 5.0, 5.0));
  CHECK(log_normalizer(iso) == doctest::Approx(9.974858362684).epsilon(1e-9));

  const FisherParams aniso = FisherParams::from(Mat3::diag(25.0, 5.0, 1.0));
  CHECK(log_normalizer(aniso) == doctest::Approx(25.195066286054).epsilon(1e-9));
  const Mat3 er = expected_rotation(aniso);
  CHECK(er[0][0] == doctest::Approx(0.963744410).epsilon(1e-7));
  CHECK(er[1][1] == doctest::Approx(0.895432395).epsilon(1e-7));
  CHECK(er[2][2] == doctest::Approx(0.892816598).epsilon(1e-7));
  // off-diagonals vanish for diagonal parameters
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(er[i][j]) <= 1e-9);
}

TEST_CASE("density integrates to one against Haar Monte Carlo") {
  Mat3 f;
  f[0] = {1.2, 0.3, -0.4};
  f[1] = {0.0, 0.8, 0.5};
  f[2] = {-0.2, 0.1, 1.5};
  const FisherParams p = FisherParams::from(f);
  Rng rng(99);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) acc += density(p, rng.uniform_rotation());
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mode maximizes the density locally and over perturbations") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const FisherParams p = FisherParams::from(random_mat(rng, -4.0, 4.0));
    const RotationMatrix m = mode(p);
    CHECK(m.valid(1e-9));
    const double at_mode = trace(transpose(p.f) * m.m);
    for (int k = 0; k < 50; ++k) {
      Vec3 w{rng.normal(), rng.normal(), rng.normal()};
      w = normalized(w) * rng.uniform(1e-3, 3.0);
      const RotationMatrix perturbed{m.m * exp_so3(w).m};
      CHECK(trace(transpose(p.f) * perturbed.m) <= at_mode + 1e-12);
    }
  }
}

TEST_CASE("gradient of the negative log-likelihood is E[R] - r") {
  Rng rng(17);
  const FisherParams p = FisherParams::from(random_mat(rng, -2.0, 2.0));
  const RotationMatrix r = rng.uniform_rotation();
  const Mat3 g = nll_grad(p, r);
  const Mat3 expect = expected_rotation(p) - r.m;
  CHECK(frobenius_norm(g - expect) == 0.0);

  // spot-check two entries against central differences
  for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 0}, {1, 2}}) {
    const double h = 1e-5;
    Mat3 fp = p.f, fm = p.f;
    fp[i][j] += h;
    fm[i][j] -= h;
    const double fd =
        (nll(FisherParams::from(fp), r) - nll(FisherParams::from(fm), r)) / (2.0 * h);
    CHECK(std::abs(fd - g[i][j]) <= 1e-4);
  }
}

TEST_CASE("concentration profile pairs singular values") {
  const FisherParams p = FisherParams::from(Mat3::diag(25.0, 5.0, 1.0));
  const Vec3 kappa = concentration_profile(p);
  CHECK(kappa.x == doctest::Approx(6.0));
  CHECK(kappa.y == doctest::Approx(26.0));
  CHECK(kappa.z == doctest::Approx(30.0));
}

TEST_CASE("marginal angle density is a normalized von Mises") {
  const FisherParams p = FisherParams::from(Mat3::diag(25.0, 5.0, 1.0));
  // Simpson over [-pi, pi)
  const int n = 20001;
  const double h = 2.0 * std::numbers::pi / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = -std::numbers::pi + i * h;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * marginal_angle_density(p, 0, t);
  }
  sum *= h / 3.0;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
  // peak at zero twist
  CHECK(marginal_angle_density(p, 0, 0.0) > marginal_angle_density(p, 0, 0.5));
}

TEST_CASE("principal axis angle recovers pure twists") {
  const FisherParams p = FisherParams::from(Mat3::diag(9.0, 6.0, 3.0));
  for (int axis = 0; axis < 3; ++axis) {
    for (double theta : {-2.9, -1.0, 0.0, 0.4, 2.2}) {
      Vec3 w{0.0, 0.0, 0.0};
      w[static_cast<std::size_t>(axis)] = theta;
      const RotationMatrix r = exp_so3(w);  // U = V = I here
      CHECK(principal_axis_angle(p, r, axis) == doctest::Approx(theta).epsilon(1e-12));
    }
  }
}

TEST_CASE("rejection sampler is deterministic and concentrates at the mode") {
  const FisherParams p = FisherParams::from(Mat3::diag(8.0, 6.0, 4.0));
  const auto a = sample(p, 200, 12345);
  const auto b = sample(p, 200, 12345);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(frobenius_norm(a[i].m - b[i].m) == 0.0);

  double mean_trace = 0.0;
  for (const auto& r : a) {
    CHECK(r.valid(1e-9));
    mean_trace += trace(transpose(p.f) * r.m);
  }
  mean_trace /= static_cast<double>(a.size());
  // concentrated: mean trace well above the Haar average (zero)
  CHECK(mean_trace > 12.0);

  const auto c = sample(p, 200, 999);
  double diff = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) diff += frobenius_norm(a[i].m - c[i].m);
  CHECK(diff > 0.0);
}

TEST_CASE("overflow and degenerate-acceptance guards throw") {
  CHECK_THROWS_AS(log_normalizer(FisherParams::from(Mat3::identity() * 600.0)),
                  NumericError);
  CHECK_THROWS_AS(sample(FisherParams::from(Mat3::identity() * 5.0e4), 10, 1),
                  NumericError);
}

TEST_CASE("von Mises fit recovers concentration from inverse-CDF samples") {
  // sample a von Mises(kappa = 4) by numeric inverse CDF, independent of
  // the library's samplers
  const double kappa = 4.0;
  const int grid = 40000;
  std::vector<double> cdf(grid + 1, 0.0);
  std::vector<double> theta(grid + 1);
  const double h = 2.0 * std::numbers::pi / grid;
  const double log_i0 = std::log(std::cyl_bessel_i(0.0, kappa));
  double acc = 0.0;
  for (int i = 0; i <= grid; ++i) {
    theta[static_cast<std::size_t>(i)] = -std::numbers::pi + i * h;
    if (i > 0) {
      const double t0 = theta[static_cast<std::size_t>(i - 1)];
      const double t1 = theta[static_cast<std::size_t>(i)];
      const double f0 = std::exp(kappa * std::cos(t0) - log_i0) / (2.0 * std::numbers::pi);
      const double f1 = std::exp(kappa * std::cos(t1) - log_i0) / (2.0 * std::numbers::pi);
      acc += 0.5 * (f0 + f1) * h;
    }
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  for (auto& v : cdf) v /= acc;

  Rng rng(4242);
  std::vector<double> angles;
  angles.reserve(20000);
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    angles.push_back(theta[std::min<std::size_t>(idx, grid)]);
  }
  const double fitted = fit_von_mises_concentration(angles);
  CHECK(fitted == doctest::Approx(kappa).epsilon(0.05));

  // edge behavior
  CHECK(fit_von_mises_concentration({0.0, 0.0, 0.0}) >= 1e3);
  std::vector<double> uniform_angles;
  for (int i = 0; i < 1000; ++i)
    uniform_angles.push_back(-std::numbers::pi + (i + 0.5) * 2.0 * std::numbers::pi / 1000);
  CHECK(fit_von_mises_concentration(uniform_angles) <= 0.1);
}

TEST_CASE("log Bessel I0 matches the standard library and stays finite") {
  for (double x : {0.0, 0.3, 2.0, 10.0, 45.0}) {
    const double ref = std::log(std::cyl_bessel_i(0.0, x));
    CHECK(log_bessel_i0(x) == doctest::Approx(ref).epsilon(1e-10));
  }
  // large argument: leading asymptotics x - log sqrt(2 pi x)
  const double x = 300.0;
  const double asym = x - 0.5 * std::log(2.0 * std::numbers::pi * x) +
                      std::log(1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
  CHECK(log_bessel_i0(x) == doctest::Approx(asym).epsilon(1e-8));
}
