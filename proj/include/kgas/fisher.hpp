#pragma once

#include <cstdint>
#include <vector>

#include "kgas/rng.hpp"
#include "kgas/so3.hpp"
#include "kgas/vec.hpp"

namespace kgas {

// Concentration parameter of a matrix-Fisher density over rotations,
// p(R) proportional to exp(tr(F^T R)), with its signed SVD cached.
struct FisherParams {
  Mat3 f;
  ProperSvd svd;

  static FisherParams from(const Mat3& f);
};

// log of the normalizing constant c(F). Depends only on the proper singular
// values; evaluated by adaptive Gauss-Legendre quadrature over Euler angles
// (results cached per singular-value triple). Throws NumericError when
// max |s_i| > 500, the overflow guard for the exp-based integrand.
double log_normalizer(const FisherParams& p);

// E[R] under p. Equals U diag(dlog c/ds_i) V^T; the diagonal moments come
// from the same quadrature pass as the normalizer.
Mat3 expected_rotation(const FisherParams& p);

// Normalized density at r.
double density(const FisherParams& p, const RotationMatrix& r);

// Mode U V^T. F = 0 returns the identity by convention.
RotationMatrix mode(const FisherParams& p);

// Negative log-likelihood log c(F) - tr(F^T r) and its gradient in F,
// E[R] - r.
double nll(const FisherParams& p, const RotationMatrix& r);
Mat3 nll_grad(const FisherParams& p, const RotationMatrix& r);

// Exact rejection sampler with Haar-uniform proposals. Deterministic per
// seed. Throws NumericError if the acceptance rate over a probe batch falls
// below 1e-6 (keep per-axis concentrations under roughly 200).
std::vector<RotationMatrix> sample(const FisherParams& p, std::size_t n,
                                   std::uint64_t seed);

// Per-axis concentrations kappa_i = s_j + s_k (i, j, k cyclic).
Vec3 concentration_profile(const FisherParams& p);

// Density of the twist angle about principal axis i (0, 1 or 2): a von
// Mises density with kappa_i, normalized over [-pi, pi).
double marginal_angle_density(const FisherParams& p, int axis, double theta);

// Twist angle of rotation r about principal axis i: the angle of
// U^T r V projected onto the rotation subgroup about e_i.
double principal_axis_angle(const FisherParams& p, const RotationMatrix& r,
                            int axis);

// Maximum-likelihood von Mises concentration for a set of angles.
double fit_von_mises_concentration(const std::vector<double>& angles);

// log I_0(x), stable for large x.
double log_bessel_i0(double x);

}  // namespace kgas
