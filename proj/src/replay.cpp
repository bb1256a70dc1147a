#include "demoreplay/replay.hpp"

#include <cmath>

#include "demoreplay/errors.hpp"

namespace demoreplay {

ReplayConfig ReplayConfig::uniform(int dof, double k) {
  ReplayConfig cfg;
  cfg.stiffness = VecX::Constant(dof, k);
  cfg.delta_q = VecX::Zero(dof);
  return cfg;
}

void ReplayConfig::validate(int dof) const {
  if (stiffness.size() != dof || delta_q.size() != dof) {
    throw DimensionMismatch("ReplayConfig: stiffness/delta_q length != dof");
  }
  if ((stiffness.array() <= 0.0).any()) {
    throw DimensionMismatch("ReplayConfig: stiffness must be positive");
  }
  if (!(damping_ratio > 0.0) || controller_damping < 0.0 || !(dt > 0.0)) {
    throw DimensionMismatch(
        "ReplayConfig: damping_ratio, dt > 0; controller_damping >= 0");
  }
  if ((delta_q.cwiseAbs().array() >= 0.2).any()) {
    throw DimensionMismatch(
        "ReplayConfig: |delta_q| must stay below 0.2 rad (recalibration "
        "offsets are small corrections)");
  }
}

VecX impedance_torque(const ReplayConfig& cfg, const VecX& q_cmd,
                      const VecX& q, const VecX& qdot) {
  if (q_cmd.size() != q.size() || qdot.size() != q.size() ||
      cfg.stiffness.size() != q.size()) {
    throw DimensionMismatch("impedance_torque: dimension mismatch");
  }
  const VecX c = cfg.controller_damping * cfg.stiffness;
  return cfg.stiffness.cwiseProduct(q_cmd + cfg.delta_q - q) -
         c.cwiseProduct(qdot);
}

VecX torque_limit_filter(const VecX& tau, const VecX& tau_lim,
                         TauPolicy policy, std::vector<int>* clamped) {
  if (tau.size() != tau_lim.size()) {
    throw DimensionMismatch("torque_limit_filter: dimension mismatch");
  }
  if ((tau_lim.array() <= 0.0).any()) {
    throw DimensionMismatch("torque_limit_filter: tau_lim must be positive");
  }
  VecX out = tau;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    if (std::abs(tau(i)) <= tau_lim(i)) continue;
    if (policy == TauPolicy::fault) {
      throw TorqueLimitExceeded("torque limit exceeded on joint " +
                                std::to_string(i + 1) + ": |" +
                                std::to_string(tau(i)) + "| > " +
                                std::to_string(tau_lim(i)));
    }
    out(i) = tau(i) > 0.0 ? tau_lim(i) : -tau_lim(i);
    if (clamped != nullptr) clamped->push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

// Linear interpolation of trajectory rows at time t, clamped at the ends.
VecX interp_rows(const VecX& times, const MatX& rows, double t) {
  const Eigen::Index n = times.size();
  if (t <= times(0)) return rows.row(0);
  if (t >= times(n - 1)) return rows.row(n - 1);
  Eigen::Index hi = 1;
  while (times(hi) < t) ++hi;
  const Eigen::Index lo = hi - 1;
  const double w = (t - times(lo)) / (times(hi) - times(lo));
  return (1.0 - w) * rows.row(lo) + w * rows.row(hi);
}

}  // namespace

ReplayResult simulate_replay(const RobotModel& model, const ReplayConfig& cfg,
                             const JointTrajectory& commanded,
                             const VecX& gripper_cmd) {
  const int dof = model.dof();
  cfg.validate(dof);
  const Eigen::Index m = commanded.size();
  if (m < 1) throw ZeroDuration("simulate_replay: empty command trajectory");
  if (commanded.states.cols() != dof) {
    throw DimensionMismatch("simulate_replay: command width != dof");
  }
  if (gripper_cmd.size() != 0 && gripper_cmd.size() != m) {
    throw DimensionMismatch(
        "simulate_replay: gripper command length != command samples");
  }

  // Fold the recalibration offsets into the command rows before any
  // interpolation; see the header note on exact offset cancellation.
  MatX target_rows = commanded.states;
  target_rows.rowwise() += cfg.delta_q.transpose();
  MatX grip_rows;
  if (gripper_cmd.size() == m) grip_rows = gripper_cmd;

  const double t0 = commanded.times(0);
  const double t1 = commanded.times(m - 1);
  const auto steps = m == 1 ? 0L
                            : static_cast<long>(
                                  std::ceil((t1 - t0) / cfg.dt - 1e-12));
  const Eigen::Index n = steps + 1;

  ReplayResult res;
  res.times.resize(n);
  res.q_cmd.resize(n, dof);
  res.q_sim.resize(n, dof);
  res.tau.resize(n, dof);
  res.gripper = VecX::Zero(n);

  const VecX b = cfg.damping_ratio * cfg.stiffness;  // plant viscosity
  const VecX c = cfg.controller_damping * cfg.stiffness;

  VecX q = target_rows.row(0);  // start on the corrected command
  VecX q_prev = q;
  double h_prev = cfg.dt;
  std::vector<int> clamped;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = i == n - 1 ? t1 : t0 + cfg.dt * static_cast<double>(i);
    const VecX q_cmd = interp_rows(commanded.times, target_rows, t);
    const VecX qdot = i == 0 ? VecX::Zero(dof) : VecX((q - q_prev) / h_prev);

    VecX tau_raw = cfg.stiffness.cwiseProduct(q_cmd - q) - c.cwiseProduct(qdot);
    clamped.clear();
    const VecX tau =
        torque_limit_filter(tau_raw, model.tau_lim(), cfg.tau_policy, &clamped);
    for (int j : clamped) res.clamp_events.push_back({t, j});

    res.times(i) = t;
    res.q_cmd.row(i) = q_cmd;
    res.q_sim.row(i) = q;
    res.tau.row(i) = tau;
    if (grip_rows.size() > 0) {
      res.gripper(i) = interp_rows(commanded.times, grip_rows, t)(0);
    }

    if (i < n - 1) {
      const double t_next =
          i + 1 == n - 1 ? t1 : t0 + cfg.dt * static_cast<double>(i + 1);
      const double h = std::max(t_next - t, 0.0);
      q_prev = q;
      q += h * tau.cwiseQuotient(b);
      h_prev = h > 0.0 ? h : cfg.dt;
      if (!q.allFinite()) throw NonFinite("simulate_replay: state blew up");
    }
  }

  // Score: RMS tracking error over the trailing 20% of the run.
  const Eigen::Index tail = std::max<Eigen::Index>(1, n / 5);
  double ss = 0.0;
  for (Eigen::Index i = n - tail; i < n; ++i) {
    ss += (res.q_cmd.row(i) - res.q_sim.row(i)).squaredNorm();
  }
  res.score = std::sqrt(ss / static_cast<double>(tail));
  res.success = res.score < 0.05;
  return res;
}

MismatchResult haptic_mismatch(const WrenchSeries& demo,
                               const WrenchSeries& replay) {
  if (demo.frame.empty() || replay.frame.empty() ||
      demo.frame != replay.frame) {
    throw FrameMismatch("haptic_mismatch: series frames differ ('" +
                        demo.frame + "' vs '" + replay.frame + "')");
  }
  if (demo.size() < 1 || replay.size() < 1) {
    throw NoOverlap("haptic_mismatch: empty series");
  }
  const double r0 = replay.times(0);
  const double r1 = replay.times(replay.size() - 1);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < demo.size(); ++i) {
    if (demo.times(i) >= r0 && demo.times(i) <= r1) keep.push_back(i);
  }
  if (keep.empty()) {
    throw NoOverlap("haptic_mismatch: demo and replay time ranges disjoint");
  }

  MismatchResult out;
  out.times.resize(static_cast<Eigen::Index>(keep.size()));
  out.diff.resize(static_cast<Eigen::Index>(keep.size()), 6);
  for (size_t j = 0; j < keep.size(); ++j) {
    const Eigen::Index i = keep[j];
    const double t = demo.times(i);
    const VecX f = interp_rows(replay.times, replay.force, t);
    const VecX tq = interp_rows(replay.times, replay.torque, t);
    out.times(static_cast<Eigen::Index>(j)) = t;
    out.diff.row(static_cast<Eigen::Index>(j)).head<3>() =
        demo.force.row(i) - f.transpose();
    out.diff.row(static_cast<Eigen::Index>(j)).tail<3>() =
        demo.torque.row(i) - tq.transpose();
  }
  for (int a = 0; a < 6; ++a) {
    out.rms(a) = std::sqrt(out.diff.col(a).squaredNorm() /
                           static_cast<double>(out.diff.rows()));
    out.peak(a) = out.diff.col(a).cwiseAbs().maxCoeff();
  }
  return out;
}

bool classify_success(const WrenchSeries& wrench, double tz_threshold,
                      double w0, double w1) {
  if (wrench.size() < 1) {
    throw WindowOutOfRange("classify_success: empty series");
  }
  if (!(w0 <= w1) || w0 < wrench.times(0) - 1e-12 ||
      w1 > wrench.times(wrench.size() - 1) + 1e-12) {
    throw WindowOutOfRange("classify_success: window outside series range");
  }
  double peak = 0.0;
  for (Eigen::Index i = 0; i < wrench.size(); ++i) {
    if (wrench.times(i) < w0 || wrench.times(i) > w1) continue;
    peak = std::max(peak, std::abs(wrench.torque(i, 2)));
  }
  return peak >= tz_threshold;
}

}  // namespace demoreplay
