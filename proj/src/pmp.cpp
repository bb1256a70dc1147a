#include "demoreplay/pmp.hpp"

#include <cmath>

#include "demoreplay/errors.hpp"

namespace demoreplay {

void PmpGains::validate() const {
  if (!(k_l > 0.0) || !(k_r > 0.0) || !(gamma > 0.0) || !(dt > 0.0) ||
      !(lambda >= 0.0)) {
    throw DimensionMismatch("PmpGains: k_l, k_r, gamma, dt > 0; lambda >= 0");
  }
  if (!(diverge_bound > 0.0) || !(settle_time >= 0.0)) {
    throw DimensionMismatch("PmpGains: diverge_bound > 0, settle_time >= 0");
  }
}

TaskCommand task_command(const Pose& current, const Pose& target, double k_l,
                         double k_r) {
  TaskCommand pi;
  const Mat3& r = current.rot.matrix();
  pi.head<3>() = k_l * (r.transpose() * (target.pos - current.pos));
  pi.tail<3>() = k_r * orientation_error(current.rot, target.rot);
  return pi;
}

namespace {

JointState pmp_step_dt(const RobotModel& model, const JointState& q,
                       const Pose& target, const PmpGains& gains, double dt) {
  const FkChain chain = fk_chain(model, q);
  const Mat6X J = jacobian(chain);

  const TaskCommand pi = task_command(chain.ee, target, gains.k_l, gains.k_r);
  // The command lives in the end-effector frame; the Jacobian is base-frame.
  const Mat3& r = chain.ee.rot.matrix();
  Vec6 pi_base;
  pi_base.head<3>() = r * pi.head<3>();
  pi_base.tail<3>() = r * pi.tail<3>();

  VecX tau = J.transpose() * pi_base;
  if (gains.lambda > 0.0) {
    const std::vector<Mat6X> parts = jacobian_partials(chain);
    VecX g = gram_cost_gradient(MatX(J),
                                std::vector<MatX>(parts.begin(), parts.end()));
    if (gains.nullspace_projection) {
      const MatX pinv =
          Eigen::CompleteOrthogonalDecomposition<MatX>(MatX(J))
              .pseudoInverse();
      g -= pinv * (J * g);
    }
    tau -= gains.lambda * g;
  }

  const JointState next = q + gains.gamma * dt * tau;
  if (!next.allFinite()) {
    throw NonFinite("pmp_step: non-finite joint update");
  }
  return model.clamp_to_limits(next);
}

void pose_error(const Pose& current, const Pose& target, double* lin,
                double* ang) {
  *lin = (target.pos - current.pos).norm();
  try {
    *ang = orientation_error(current.rot, target.rot).norm();
  } catch (const AngleNearPi&) {
    *ang = M_PI;
  }
}

}  // namespace

JointState pmp_step(const RobotModel& model, const JointState& q,
                    const Pose& target, const PmpGains& gains) {
  gains.validate();
  return pmp_step_dt(model, q, target, gains, gains.dt);
}

JointTrajectory solve_trajectory(const RobotModel& model, const JointState& q0,
                                 const DemoTrajectory& demo,
                                 const PmpGains& gains) {
  gains.validate();
  model.check_dimension(q0);
  const Eigen::Index n = demo.size();
  if (n < 1) throw ZeroDuration("solve_trajectory: empty demonstration");

  JointTrajectory out;
  out.times = demo.times;
  out.states.resize(n, model.dof());
  out.tracking_err.resize(n, 2);

  JointState q = q0;
  double lin = 0.0, ang = 0.0;
  pose_error(fk(model, q), demo.poses[0], &lin, &ang);
  out.states.row(0) = q;
  out.tracking_err.row(0) << lin, ang;

  const double t0 = demo.times(0);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double ta = demo.times(k - 1);
    const double tb = demo.times(k);
    const auto steps =
        std::max<long>(1, static_cast<long>(std::ceil((tb - ta) / gains.dt)));
    const double h = (tb - ta) / static_cast<double>(steps);
    for (long s = 1; s <= steps; ++s) {
      const Pose target =
          demo.interpolate_pose(ta + h * static_cast<double>(s));
      q = pmp_step_dt(model, q, target, gains, h);
    }
    pose_error(fk(model, q), demo.poses[static_cast<size_t>(k)], &lin, &ang);
    out.states.row(k) = q;
    out.tracking_err.row(k) << lin, ang;

    if (tb - t0 >= gains.settle_time && lin > gains.diverge_bound) {
      throw DivergedTracking("solve_trajectory: linear error " +
                             std::to_string(lin) + " m at t=" +
                             std::to_string(tb));
    }
  }
  return out;
}

}  // namespace demoreplay
