#pragma once

#include "kgas/vec.hpp"

namespace kgas {

// Rotation matrix wrapper. validate() checks R^T R = I within 1e-9 and
// det = +1 within 1e-9; construction via from() enforces it, while the
// raw field stays accessible for internal composition chains whose
// orthogonality is guaranteed by construction.
struct RotationMatrix {
  Mat3 m = Mat3::identity();

  static RotationMatrix from(const Mat3& m);
  bool valid(double tol = 1e-9) const;
};

// Unit axis plus angle in [0, pi].
struct AxisAngle {
  Vec3 axis{1.0, 0.0, 0.0};
  double angle = 0.0;
};

// Signed SVD F = U diag(S) V^T with det(U) = det(V) = +1 and
// s1 >= s2 >= |s3|; s3 carries the sign of det(F).
struct ProperSvd {
  Mat3 u = Mat3::identity();
  Vec3 s{0.0, 0.0, 0.0};
  Mat3 v = Mat3::identity();
};

// Skew-symmetric cross-product matrix: hat(v) * w = v x w.
Mat3 hat(const Vec3& v);

// Inverse of hat on the skew-symmetric part: vee(A) from (A - A^T) / 2.
Vec3 vee(const Mat3& a);

// Rodrigues exponential. The axis is normalized internally; a zero axis with
// zero angle maps to the identity.
RotationMatrix exp_so3(const AxisAngle& aa);
RotationMatrix exp_so3(const Vec3& rotation_vector);

// Logarithm with angle in [0, pi]. At the identity returns axis (1,0,0),
// angle 0. Near angle pi the axis is recovered from the dominant column of
// (R + I) / 2; when the sign is numerically ambiguous it is fixed so the
// largest-magnitude axis component is positive.
AxisAngle log_so3(const RotationMatrix& r);

// Signed SVD by one-sided Jacobi (tolerance 1e-12, at most 60 sweeps),
// singular values sorted descending before the sign of det moves to s3.
ProperSvd proper_svd(const Mat3& f);

}  // namespace kgas
