#pragma once

#include <Eigen/Dense>

#include "demoreplay/robot.hpp"
#include "demoreplay/trajectory.hpp"

namespace demoreplay {

/// Generalized task-space force: rows 0-2 linear, rows 3-5 rotational,
/// expressed in the current end-effector frame.
using TaskCommand = Vec6;

/// First-order admittance gains. Defaults give a linear-error time constant
/// of a few milliseconds, well below demonstration motion timescales.
struct PmpGains {
  double k_l = 1000.0;  // linear stiffness
  double k_r = 100.0;   // rotational stiffness
  double gamma = 1.0;   // joint admittance, rad/s per unit torque
  double lambda = 1e-3; // manipulability-descent weight
  double dt = 1e-3;     // s, integration substep

  // Route the cost-descent torque through the null-space projector
  // I - pinv(J) J instead of subtracting it directly.
  bool nullspace_projection = false;

  // Tracking is declared diverged when the linear error still exceeds
  // diverge_bound once settle_time has elapsed; the initial transient from
  // q0 toward the first demo pose is exempt.
  double diverge_bound = 0.2;  // m
  double settle_time = 0.25;   // s

  void validate() const;
};

/// Joint-space solution with per-sample task tracking error.
struct JointTrajectory {
  VecX times;         // s, strictly increasing
  MatX states;        // N x D, rad
  MatX tracking_err;  // N x 2: linear (m), angular (rad)

  Eigen::Index size() const { return times.size(); }
};

/// Pi = [k_l R^T (p_G - p); k_r log(R^T R_G)] for current pose (R, p) and
/// target (R_G, p_G). Throws AngleNearPi via the rotation log.
TaskCommand task_command(const Pose& current, const Pose& target, double k_l,
                         double k_r);

/// One explicit-Euler step of q_dot = gamma (J^T Pi_base - lambda grad_h),
/// clamped to joint limits. Pi is computed in the end-effector frame per
/// task_command and rotated into the base frame before the J^T mapping.
JointState pmp_step(const RobotModel& model, const JointState& q,
                    const Pose& target, const PmpGains& gains);

/// Track a demonstrated pose trajectory: substeps of at most gains.dt per
/// demo interval, target interpolated between samples (linear position,
/// geodesic rotation). Throws DivergedTracking per the gains policy.
JointTrajectory solve_trajectory(const RobotModel& model, const JointState& q0,
                                 const DemoTrajectory& demo,
                                 const PmpGains& gains);

}  // namespace demoreplay
