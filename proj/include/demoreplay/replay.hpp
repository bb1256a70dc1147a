#pragma once

#include <string>
#include <vector>

#include "demoreplay/pmp.hpp"
#include "demoreplay/robot.hpp"

namespace demoreplay {

enum class TauPolicy { clamp, fault };

/// Impedance replay configuration. The simulated plant is first-order
/// viscous per joint, q_dot = tau / b with b = damping_ratio * stiffness, so
/// the closed-loop tracking time constant is (b + c) / K = damping_ratio +
/// controller_damping seconds. This is an analytically checkable stand-in
/// for the torque-controlled robot, not a robot model.
struct ReplayConfig {
  VecX stiffness;                  // K, per joint (N*m/rad)
  double damping_ratio = 0.1;      // plant viscosity scale, b = ratio * K
  double controller_damping = 0.0; // c = controller_damping * K
  VecX delta_q;                    // recalibration offsets, rad (input data)
  TauPolicy tau_policy = TauPolicy::clamp;
  double dt = 1e-3;                // s

  /// Broadcast a scalar stiffness and zero offsets over D joints.
  static ReplayConfig uniform(int dof, double k);
  void validate(int dof) const;
};

/// Time-indexed force/torque samples in a named frame (receptacle frame for
/// task haptics).
struct WrenchSeries {
  VecX times;        // s, strictly increasing
  MatX force;        // N x 3, N
  MatX torque;       // N x 3, N*m
  std::string frame; // required label

  Eigen::Index size() const { return times.size(); }
};

struct ClampEvent {
  double t;
  int joint;
};

struct ReplayResult {
  VecX times;      // sim clock
  MatX q_cmd;      // commanded (offset-corrected) joints per step
  MatX q_sim;      // simulated joints
  MatX tau;        // filtered torques actually applied
  VecX gripper;    // relayed aperture command
  std::vector<ClampEvent> clamp_events;
  bool success = false;  // tracked to within tolerance, no fault
  double score = 0.0;    // RMS joint tracking error over the final 20%
};

/// tau = K o ((q_cmd + delta_q) - q) - c o qdot.
VecX impedance_torque(const ReplayConfig& cfg, const VecX& q_cmd,
                      const VecX& q, const VecX& qdot);

/// clamp: elementwise saturation to +-tau_lim, saturated joints appended to
/// `clamped` when given. fault: TorqueLimitExceeded on first violation.
VecX torque_limit_filter(const VecX& tau, const VecX& tau_lim,
                         TauPolicy policy,
                         std::vector<int>* clamped = nullptr);

/// Integrate the viscous plant against the impedance law at cfg.dt, with the
/// commanded trajectory linearly interpolated between samples. delta_q is
/// folded into the commanded rows up front, so shifting the command by
/// delta_q and zeroing cfg.delta_q reproduces the run bit for bit.
/// `gripper_cmd` (aligned with commanded.times, or empty) is resampled and
/// logged alongside.
ReplayResult simulate_replay(const RobotModel& model, const ReplayConfig& cfg,
                             const JointTrajectory& commanded,
                             const VecX& gripper_cmd);

struct MismatchResult {
  VecX times;   // demo timestamps inside the replay span
  MatX diff;    // N x 6: demo - replay, force then torque
  Vec6 rms;     // per axis
  Vec6 peak;    // per axis, max |diff|
};

/// Difference between demonstration and replay wrenches on the demo clock
/// (replay linearly resampled). Throws FrameMismatch / NoOverlap.
MismatchResult haptic_mismatch(const WrenchSeries& demo,
                               const WrenchSeries& replay);

/// Success heuristic: assembly is assumed achieved when |tau_z| reaches
/// tz_threshold somewhere inside the window [w0, w1].
bool classify_success(const WrenchSeries& wrench, double tz_threshold,
                      double w0, double w1);

}  // namespace demoreplay
