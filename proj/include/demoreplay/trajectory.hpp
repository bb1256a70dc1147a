#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "demoreplay/se3.hpp"

namespace demoreplay {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Time-indexed gripper pose + finger aperture. The unit that flows from the
/// marker filter through GMR into the joint-space solver.
struct DemoTrajectory {
  VecX times;                  // s, strictly increasing
  std::vector<Pose> poses;     // gripper frame in world
  VecX aperture;               // finger distance d, m, >= 0
  std::vector<uint8_t> held;   // 1 where registration failed and the pose was
                               // held from the previous frame; empty == none

  Eigen::Index size() const { return times.size(); }
  double duration() const {
    return times.size() > 0 ? times(times.size() - 1) - times(0) : 0.0;
  }

  /// Pose at time t: linear in position, geodesic in rotation between
  /// samples; clamped at the ends.
  Pose interpolate_pose(double t) const;

  /// Demonstration expressed in a different world frame: every pose
  /// premultiplied by w.
  DemoTrajectory transformed(const Pose& w) const;
};

void check_strictly_increasing(const VecX& times, const char* what);

}  // namespace demoreplay
