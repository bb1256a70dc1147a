#pragma once

#include <optional>
#include <vector>

#include "demoreplay/pmp.hpp"

namespace demoreplay {

/// Planar grid of candidate base positions; z and yaw are fixed.
struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int nx = 10, ny = 10;
  double z = 0.0;
  double yaw = 0.0;

  void validate() const;
  double x_at(int ix) const;
  double y_at(int iy) const;
  Pose base_pose(int ix, int iy) const;
};

enum class ScenarioStatus { ok, diverged };

/// One candidate base pose with its average-manipulability score. Diverged
/// scenarios keep a -inf sentinel score so the exported field still shows
/// the feasible region.
struct Scenario {
  Pose base;
  double x = 0.0, y = 0.0;
  double score = 0.0;
  ScenarioStatus status = ScenarioStatus::ok;
  std::optional<JointTrajectory> solved;
};

struct GridResult {
  Scenario best;
  std::vector<Scenario> all;  // x-major order: index = ix * ny + iy
};

/// End-effector pose in the world frame for a robot based at `base`.
Pose scenario_fk(const Pose& base, const RobotModel& model,
                 const JointState& q);

/// Time average of `values` by the trapezoid rule. Throws ZeroDuration when
/// the span is empty.
double trapezoid_mean(const VecX& times, const VecX& values);

/// Solve the joint trajectory for a robot based at `base`, then average
/// det(J J^T) over it. DivergedTracking propagates to the caller.
double average_manipulability(const RobotModel& model, const Pose& base,
                              const DemoTrajectory& demo, const JointState& q0,
                              const PmpGains& gains,
                              JointTrajectory* solved = nullptr);

/// Argmax by score over converged scenarios; exact ties break toward lower
/// x, then lower y. Throws AllDiverged when no scenario converged.
const Scenario& argmax_scenario(const std::vector<Scenario>& all);

/// Evaluate every grid point (concurrently up to `workers`) and return the
/// argmax. Ties break deterministically toward lower x, then lower y,
/// independent of scheduling. Throws AllDiverged when nothing converges.
GridResult grid_search(const RobotModel& model, const DemoTrajectory& demo,
                       const GridSpec& grid, const JointState& q0,
                       const PmpGains& gains, int workers = 1);

}  // namespace demoreplay
