#include "demoreplay/trajectory.hpp"

#include <algorithm>

#include "demoreplay/errors.hpp"

namespace demoreplay {

void check_strictly_increasing(const VecX& times, const char* what) {
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times(i) > times(i - 1))) {
      throw ParseError(std::string(what) +
                       ": timestamps must be strictly increasing");
    }
  }
}

Pose DemoTrajectory::interpolate_pose(double t) const {
  if (poses.empty()) throw ZeroDuration("interpolate_pose: empty trajectory");
  if (t <= times(0)) return poses.front();
  const Eigen::Index n = times.size();
  if (t >= times(n - 1)) return poses.back();

  // First index with times(hi) > t; lo = hi - 1.
  const double* begin = times.data();
  const auto hi =
      static_cast<Eigen::Index>(std::upper_bound(begin, begin + n, t) - begin);
  const Eigen::Index lo = hi - 1;
  const double w = (t - times(lo)) / (times(hi) - times(lo));

  const Pose& a = poses[static_cast<size_t>(lo)];
  const Pose& b = poses[static_cast<size_t>(hi)];
  Pose out;
  // a + w (b - a) rather than (1-w) a + w b: exact when both ends coincide.
  out.pos = a.pos + w * (b.pos - a.pos);
  out.rot = a.rot * so3_exp(w * orientation_error(a.rot, b.rot));
  return out;
}

DemoTrajectory DemoTrajectory::transformed(const Pose& w) const {
  DemoTrajectory out = *this;
  for (auto& p : out.poses) p = pose_compose(w, p);
  return out;
}

}  // namespace demoreplay
