#pragma once

#include <Eigen/Dense>

#include "demoreplay/errors.hpp"

namespace demoreplay {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Axis-angle rotation vector. Canonical values satisfy |r| < pi; dataset
// builders may carry branch-continued values with |r| >= pi (see
// so3_log_continuous).
using RotVec = Eigen::Vector3d;

// Orthonormality / determinant tolerance for Rotation construction.
inline constexpr double kRotationTol = 1e-9;

// so3_log refuses rotations with |trace(R) + 1| below this bound: the angle
// is then within ~1e-3 rad of pi where the axis sign is ill-determined.
inline constexpr double kNearPiTraceTol = 1e-6;

/// 3x3 rotation matrix with construction-time validity checks.
///
/// Arithmetic (products, inverses, exp) builds results unchecked since they
/// preserve orthonormality to machine precision; only external matrices go
/// through from_matrix(). Re-orthonormalization of noisy input is the data
/// ingestion layer's job (see orthonormalized()), never done here silently.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Validates orthonormality and det = +1 within kRotationTol.
  static Rotation from_matrix(const Mat3& m) {
    if (!is_valid(m)) {
      throw InvalidRotation("matrix is not a rotation within tolerance");
    }
    return Rotation(m, Unchecked{});
  }

  static Rotation identity() { return Rotation(); }

  static bool is_valid(const Mat3& m, double tol = kRotationTol) {
    if (!m.allFinite()) return false;
    Mat3 gram = m.transpose() * m;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
  }

  const Mat3& matrix() const { return m_; }

  Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

  Rotation operator*(const Rotation& o) const {
    return Rotation(m_ * o.m_, Unchecked{});
  }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  friend Rotation unchecked_rotation(const Mat3& m);

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Escape hatch for internal code that constructs provably-orthonormal
/// matrices (Rodrigues, Kabsch with sign correction).
inline Rotation unchecked_rotation(const Mat3& m) {
  return Rotation(m, Rotation::Unchecked{});
}

/// Rigid transform: rotation plus translation (meters).
struct Pose {
  Rotation rot;
  Vec3 pos = Vec3::Zero();
};

/// Rodrigues formula. Valid for any |r|, with Taylor branches near zero.
Rotation so3_exp(const RotVec& r);

/// Canonical-branch logarithm, |result| < pi.
/// Throws AngleNearPi when |trace(R)+1| < kNearPiTraceTol; callers that can
/// resolve the branch from context should use so3_log_continuous.
RotVec so3_log(const Rotation& R);

/// Logarithm with the axis sign and 2*pi branch chosen to minimize the jump
/// from `prev`. Handles the near-pi band (axis recovered from the symmetric
/// part, sign from the residual skew or from `prev`). The result may have
/// |r| >= pi; exp(result) == R still holds. Throws AngleNearPi only when the
/// sign is genuinely unresolvable (near-pi rotation and `prev` carries no
/// usable direction).
RotVec so3_log_continuous(const Rotation& R, const RotVec& prev);

Pose pose_compose(const Pose& a, const Pose& b);
Pose pose_inverse(const Pose& a);

/// log(R^T R_G): the rotational error term driving R toward R_G,
/// expressed in the R frame. Zero iff R == R_G.
RotVec orientation_error(const Rotation& R, const Rotation& R_G);

/// Nearest rotation in the Frobenius sense (polar projection via SVD with
/// determinant sign correction). For noisy measurement ingestion only.
Rotation orthonormalized(const Mat3& m);

}  // namespace demoreplay
