#include "demoreplay/se3.hpp"

#include <cmath>

namespace demoreplay {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Vec3 vee_antisym(const Mat3& m) {
  // (m - m^T)/2 applied implicitly; for the log this equals sin(theta)*axis.
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

}  // namespace

Rotation so3_exp(const RotVec& r) {
  const double theta2 = r.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = skew(r);
  return unchecked_rotation(Mat3(Mat3::Identity() + a * k + b * k * k));
}

RotVec so3_log(const Rotation& R) {
  const Mat3& m = R.matrix();
  const double tr = m.trace();
  if (std::abs(tr + 1.0) < kNearPiTraceTol) {
    throw AngleNearPi("so3_log: rotation angle within branch tolerance of pi");
  }
  const Vec3 w = vee_antisym(m);  // sin(theta) * axis
  const double s = w.norm();
  const double c = 0.5 * (tr - 1.0);
  const double theta = std::atan2(s, c);
  if (theta < 1e-7) {
    // theta/sin(theta) ~ 1 + theta^2/6
    return (1.0 + theta * theta / 6.0) * w;
  }
  return (theta / s) * w;
}

RotVec so3_log_continuous(const Rotation& R, const RotVec& prev) {
  const Mat3& m = R.matrix();
  const double tr = m.trace();
  const Vec3 w = vee_antisym(m);  // sin(theta) * axis
  const double s = w.norm();
  const double c = 0.5 * (tr - 1.0);
  const double theta = std::atan2(s, c);

  Vec3 axis;
  if (std::abs(tr + 1.0) >= kNearPiTraceTol) {
    if (theta < 1e-12) {
      // Identity within noise: axis only matters for the 2*pi branches.
      axis = prev.norm() > 1e-12 ? Vec3(prev.normalized()) : Vec3::UnitX();
    } else {
      axis = w / s;
    }
  } else {
    // Near pi the skew part nearly vanishes; recover the axis from the
    // symmetric part: (R + R^T)/2 = cos(t) I + (1 - cos(t)) u u^T.
    const Mat3 sym = 0.5 * (m + m.transpose());
    const Mat3 outer = (sym - c * Mat3::Identity()) / (1.0 - c);
    int imax;
    outer.diagonal().maxCoeff(&imax);
    axis = outer.col(imax) / std::sqrt(std::max(outer(imax, imax), 1e-300));
    axis.normalize();
    // Sign: prefer the residual skew when it is still informative, fall
    // back to continuity with prev.
    if (s > 1e-8) {
      if (axis.dot(w) < 0.0) axis = -axis;
    } else if (std::abs(axis.dot(prev)) > 1e-9) {
      if (axis.dot(prev) < 0.0) axis = -axis;
    } else {
      throw AngleNearPi(
          "so3_log_continuous: axis sign unresolvable at angle ~pi");
    }
  }

  // Pick the 2*pi branch closest to prev.
  constexpr double kTwoPi = 2.0 * M_PI;
  RotVec best = axis * theta;
  double best_d = (best - prev).norm();
  for (int k = -2; k <= 2; ++k) {
    if (k == 0) continue;
    const RotVec cand = axis * (theta + kTwoPi * static_cast<double>(k));
    const double d = (cand - prev).norm();
    if (d < best_d) {
      best = cand;
      best_d = d;
    }
  }
  return best;
}

Pose pose_compose(const Pose& a, const Pose& b) {
  return Pose{a.rot * b.rot, a.rot * b.pos + a.pos};
}

Pose pose_inverse(const Pose& a) {
  const Rotation rinv = a.rot.inverse();
  return Pose{rinv, -(rinv * a.pos)};
}

RotVec orientation_error(const Rotation& R, const Rotation& R_G) {
  return so3_log(R.inverse() * R_G);
}

Rotation orthonormalized(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return unchecked_rotation(r);
}

}  // namespace demoreplay
