#pragma once

#include <vector>

#include <Eigen/Dense>

#include "demoreplay/se3.hpp"

namespace demoreplay {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Joint configuration, rad. Length must match RobotModel::dof().
using JointState = Eigen::VectorXd;

/// Classic DH row. Joint i applies
///   rot_z(theta_offset + q) * trans_z(d) * trans_x(a) * rot_x(alpha).
struct DhJoint {
  double a = 0.0;             // m
  double alpha = 0.0;         // rad
  double d = 0.0;             // m
  double theta_offset = 0.0;  // rad
};

/// Immutable serial-chain description: DH rows, joint limits, torque limits.
/// All operations on it are pure functions of (model, q), safe to evaluate
/// concurrently.
class RobotModel {
 public:
  RobotModel(std::vector<DhJoint> joints, VecX q_min, VecX q_max, VecX tau_lim,
             VecX q_home = VecX());

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<DhJoint>& joints() const { return joints_; }
  const VecX& q_min() const { return q_min_; }
  const VecX& q_max() const { return q_max_; }
  const VecX& tau_lim() const { return tau_lim_; }

  /// Preferred rest posture, usable as a solver q0. Zeros unless the config
  /// file provides one.
  const VecX& q_home() const { return q_home_; }

  JointState clamp_to_limits(const JointState& q) const;
  void check_dimension(const JointState& q) const;

 private:
  std::vector<DhJoint> joints_;
  VecX q_min_, q_max_, tau_lim_, q_home_;
};

/// Per-joint chain quantities for one configuration, computed in a single
/// forward pass and reused by the Jacobian and its partials.
struct FkChain {
  Pose ee;                    // end effector in robot base frame
  std::vector<Vec3> axis;     // z axis of joint i, base frame
  std::vector<Vec3> origin;   // position of joint i, base frame
};

FkChain fk_chain(const RobotModel& model, const JointState& q);

/// End-effector pose in the robot base frame.
Pose fk(const RobotModel& model, const JointState& q);

/// Geometric Jacobian, base frame. Rows 0-2 linear (m/rad), rows 3-5 angular.
/// Column i = [z_i x (p_E - p_i); z_i].
Mat6X jacobian(const RobotModel& model, const JointState& q);
Mat6X jacobian(const FkChain& chain);

/// Exact partial derivatives dJ/dq_i, one 6xD matrix per joint.
std::vector<Mat6X> jacobian_partials(const RobotModel& model,
                                     const JointState& q);
std::vector<Mat6X> jacobian_partials(const FkChain& chain);

/// det(J J^T) for a task Jacobian with rows <= cols; clamped at 0 from below
/// (the Gram determinant is nonnegative up to roundoff).
/// Throws RankDeficientModel when cols < rows: the determinant is then
/// identically zero for every q, which signals a misconfigured model.
double manipulability(const MatX& J);
double manipulability(const RobotModel& model, const JointState& q);

/// Cost h = -det(J J^T) <= 0; its maximum 0 is attained exactly at
/// singularities.
double cost_h(const RobotModel& model, const JointState& q);

/// Gradient of h = -det(J J^T) via the trace identity written with the
/// adjugate, d h/d q_i = -tr(adj(J J^T) (dJ_i J^T + J dJ_i^T)), which is
/// algebraically det * tr(inverse * ...) for regular Gram matrices but stays
/// finite and goes to zero continuously at singular configurations.
VecX gram_cost_gradient(const MatX& J, const std::vector<MatX>& dJ);
VecX grad_h(const RobotModel& model, const JointState& q);

/// Adjugate of the symmetric Gram matrix. LU with partial pivoting when the
/// pivots are healthy; spectral form otherwise (det * inverse is NaN at an
/// exactly singular matrix, the eigendecomposition of the symmetric Gram is
/// not).
MatX gram_adjugate(const MatX& gram);

}  // namespace demoreplay
