#include "demoreplay/robot.hpp"

#include <cmath>
#include <utility>

#include "demoreplay/errors.hpp"

namespace demoreplay {

RobotModel::RobotModel(std::vector<DhJoint> joints, VecX q_min, VecX q_max,
                       VecX tau_lim, VecX q_home)
    : joints_(std::move(joints)),
      q_min_(std::move(q_min)),
      q_max_(std::move(q_max)),
      tau_lim_(std::move(tau_lim)),
      q_home_(std::move(q_home)) {
  const auto d = static_cast<Eigen::Index>(joints_.size());
  if (d < 1) throw DimensionMismatch("RobotModel: needs at least one joint");
  if (q_min_.size() != d || q_max_.size() != d || tau_lim_.size() != d) {
    throw DimensionMismatch("RobotModel: limit vector length != joint count");
  }
  if (((q_max_ - q_min_).array() <= 0.0).any()) {
    throw DimensionMismatch("RobotModel: q_min must be < q_max elementwise");
  }
  if ((tau_lim_.array() <= 0.0).any()) {
    throw DimensionMismatch("RobotModel: tau_lim must be positive");
  }
  if (q_home_.size() == 0) {
    q_home_ = VecX::Zero(d);
  } else if (q_home_.size() != d) {
    throw DimensionMismatch("RobotModel: q_home length != joint count");
  }
}

JointState RobotModel::clamp_to_limits(const JointState& q) const {
  check_dimension(q);
  return q.cwiseMax(q_min_).cwiseMin(q_max_);
}

void RobotModel::check_dimension(const JointState& q) const {
  if (q.size() != dof()) {
    throw DimensionMismatch("joint vector length does not match model dof");
  }
}

namespace {

// Classic DH transform of one joint at angle q.
void dh_step(const DhJoint& j, double q, Mat3* r, Vec3* p) {
  const double ct = std::cos(j.theta_offset + q);
  const double st = std::sin(j.theta_offset + q);
  const double ca = std::cos(j.alpha);
  const double sa = std::sin(j.alpha);
  (*r) << ct, -st * ca, st * sa,  //
      st, ct * ca, -ct * sa,      //
      0.0, sa, ca;
  (*p) << j.a * ct, j.a * st, j.d;
}

}  // namespace

FkChain fk_chain(const RobotModel& model, const JointState& q) {
  model.check_dimension(q);
  const int d = model.dof();
  FkChain chain;
  chain.axis.reserve(d);
  chain.origin.reserve(d);

  Mat3 r = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  Mat3 rj;
  Vec3 pj;
  for (int i = 0; i < d; ++i) {
    // Joint i rotates about the z axis of the frame reached so far.
    chain.axis.push_back(r.col(2));
    chain.origin.push_back(p);
    dh_step(model.joints()[i], q(i), &rj, &pj);
    p = r * pj + p;
    r = r * rj;
  }
  chain.ee = Pose{unchecked_rotation(r), p};
  return chain;
}

Pose fk(const RobotModel& model, const JointState& q) {
  return fk_chain(model, q).ee;
}

Mat6X jacobian(const FkChain& chain) {
  const int d = static_cast<int>(chain.axis.size());
  Mat6X j(6, d);
  const Vec3& pe = chain.ee.pos;
  for (int i = 0; i < d; ++i) {
    j.col(i).head<3>() = chain.axis[i].cross(pe - chain.origin[i]);
    j.col(i).tail<3>() = chain.axis[i];
  }
  return j;
}

Mat6X jacobian(const RobotModel& model, const JointState& q) {
  return jacobian(fk_chain(model, q));
}

std::vector<Mat6X> jacobian_partials(const FkChain& chain) {
  const int d = static_cast<int>(chain.axis.size());
  const Vec3& pe = chain.ee.pos;
  std::vector<Mat6X> parts(d, Mat6X::Zero(6, d));
  for (int k = 0; k < d; ++k) {
    const Vec3& zk = chain.axis[k];
    const Vec3& pk = chain.origin[k];
    Mat6X& dj = parts[k];
    for (int i = 0; i < d; ++i) {
      const Vec3& zi = chain.axis[i];
      const Vec3 rel = pe - chain.origin[i];
      if (k < i) {
        // q_k rotates joint i's axis and origin about z_k.
        const Vec3 dz = zk.cross(zi);
        dj.col(i).head<3>() = dz.cross(rel) + zi.cross(zk.cross(rel));
        dj.col(i).tail<3>() = dz;
      } else {
        // Only the end-effector term depends on q_k.
        dj.col(i).head<3>() = zi.cross(zk.cross(pe - pk));
      }
    }
  }
  return parts;
}

std::vector<Mat6X> jacobian_partials(const RobotModel& model,
                                     const JointState& q) {
  return jacobian_partials(fk_chain(model, q));
}

double manipulability(const MatX& J) {
  if (J.cols() < J.rows()) {
    throw RankDeficientModel(
        "manipulability: fewer joints than task rows, det(J J^T) is "
        "identically zero");
  }
  const MatX gram = J * J.transpose();
  return std::max(gram.determinant(), 0.0);
}

double manipulability(const RobotModel& model, const JointState& q) {
  return manipulability(MatX(jacobian(model, q)));
}

double cost_h(const RobotModel& model, const JointState& q) {
  return -manipulability(model, q);
}

MatX gram_adjugate(const MatX& gram) {
  const auto n = gram.rows();
  if (n == 1) return MatX::Ones(1, 1);

  Eigen::PartialPivLU<MatX> lu(gram);
  const VecX pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pmax = pivots.maxCoeff();
  if (pmax > 0.0 && pivots.minCoeff() > 1e-9 * pmax) {
    MatX adj = lu.determinant() * lu.inverse();
    return 0.5 * (adj + adj.transpose());
  }

  // Near-singular Gram: product-of-other-eigenvalues form.
  Eigen::SelfAdjointEigenSolver<MatX> es(gram);
  const VecX& lam = es.eigenvalues();
  VecX prod(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) p *= lam(j);
    }
    prod(i) = p;
  }
  return es.eigenvectors() * prod.asDiagonal() * es.eigenvectors().transpose();
}

VecX gram_cost_gradient(const MatX& J, const std::vector<MatX>& dJ) {
  if (J.cols() < J.rows()) {
    throw RankDeficientModel(
        "gram_cost_gradient: fewer joints than task rows");
  }
  const MatX gram = J * J.transpose();
  const MatX adj = gram_adjugate(gram);
  VecX g(static_cast<Eigen::Index>(dJ.size()));
  for (size_t i = 0; i < dJ.size(); ++i) {
    if (dJ[i].rows() != J.rows() || dJ[i].cols() != J.cols()) {
      throw DimensionMismatch("gram_cost_gradient: dJ shape mismatch");
    }
    const MatX dgram = dJ[i] * J.transpose() + J * dJ[i].transpose();
    g(static_cast<Eigen::Index>(i)) = -(adj * dgram).trace();
  }
  return g;
}

VecX grad_h(const RobotModel& model, const JointState& q) {
  const FkChain chain = fk_chain(model, q);
  const Mat6X J = jacobian(chain);
  const std::vector<Mat6X> parts = jacobian_partials(chain);
  std::vector<MatX> dJ(parts.begin(), parts.end());
  return gram_cost_gradient(MatX(J), dJ);
}

}  // namespace demoreplay
