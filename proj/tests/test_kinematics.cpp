#include "demoreplay/robot.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_utils.hpp"

namespace demoreplay {
namespace {

using testing::load_seven_dof;
using testing::random_config;

RobotModel single_joint_z_offset() {
  return RobotModel({DhJoint{0.0, 0.0, 0.3, 0.0}}, VecX::Constant(1, -3.0),
                    VecX::Constant(1, 3.0), VecX::Constant(1, 10.0));
}

RobotModel planar_2r() {
  std::vector<DhJoint> joints(2, DhJoint{1.0, 0.0, 0.0, 0.0});
  return RobotModel(joints, VecX::Constant(2, -3.0), VecX::Constant(2, 3.0),
                    VecX::Constant(2, 10.0));
}

// Central finite differences of fk: position directly, orientation through
// log increments mapped to the base frame.
Mat6X jacobian_fd(const RobotModel& model, const JointState& q, double step) {
  Mat6X j(6, model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    JointState qp = q, qm = q;
    qp(i) += step;
    qm(i) -= step;
    const Pose pp = fk(model, qp);
    const Pose pm = fk(model, qm);
    j.col(i).head<3>() = (pp.pos - pm.pos) / (2.0 * step);
    const RotVec dbody = orientation_error(pm.rot, pp.rot) / (2.0 * step);
    j.col(i).tail<3>() = fk(model, q).rot.matrix() * dbody;
  }
  return j;
}

TEST(Fk, SingleJointZOffset) {
  const RobotModel model = single_joint_z_offset();
  const Pose p = fk(model, VecX::Zero(1));
  EXPECT_TRUE(p.rot.matrix().isApprox(Mat3::Identity(), 1e-15));
  EXPECT_LT((p.pos - Vec3(0.0, 0.0, 0.3)).norm(), 1e-15);
}

TEST(Fk, Planar2RStretched) {
  const Pose p = fk(planar_2r(), VecX::Zero(2));
  EXPECT_LT((p.pos - Vec3(2.0, 0.0, 0.0)).norm(), 1e-15);
}

TEST(Fk, Planar2RElbowBend) {
  VecX q(2);
  q << M_PI_2, -M_PI_2;
  const Pose p = fk(planar_2r(), q);
  EXPECT_LT((p.pos - Vec3(1.0, 1.0, 0.0)).norm(), 1e-12);
}

TEST(Fk, DimensionMismatchThrows) {
  EXPECT_THROW(fk(planar_2r(), VecX::Zero(3)), DimensionMismatch);
}

TEST(Jacobian, Planar2RHandValues) {
  const Mat6X j = jacobian(planar_2r(), VecX::Zero(2));
  EXPECT_LT((j.col(0).head<3>() - Vec3(0.0, 2.0, 0.0)).norm(), 1e-14);
  EXPECT_LT((j.col(1).head<3>() - Vec3(0.0, 1.0, 0.0)).norm(), 1e-14);
  EXPECT_LT((j.col(0).tail<3>() - Vec3(0.0, 0.0, 1.0)).norm(), 1e-14);
}

TEST(Jacobian, LastColumnAngularIsLastAxis) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(3);
  const JointState q = random_config(model, rng);
  const FkChain chain = fk_chain(model, q);
  const Mat6X j = jacobian(chain);
  EXPECT_LT((j.col(6).tail<3>() - chain.axis.back()).norm(), 1e-15);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const JointState q = random_config(model, rng);
    const Mat6X j = jacobian(model, q);
    const Mat6X j_fd = jacobian_fd(model, q, 1e-6);
    const double denom = std::max(1.0, j.cwiseAbs().maxCoeff());
    EXPECT_LT((j - j_fd).cwiseAbs().maxCoeff() / denom, 1e-5)
        << "q=" << q.transpose();
  }
}

TEST(Jacobian, SerialChainColumnDependency) {
  // Perturbing a distal joint k leaves the angular part of proximal
  // columns untouched, and shifts their linear part only through the
  // common end-effector term z_i x (dp_E).
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(9);
  const JointState q = random_config(model, rng);
  const FkChain chain = fk_chain(model, q);
  const Mat6X j0 = jacobian(chain);

  const int k = 4;  // perturb joint 5
  JointState qp = q;
  qp(k) += 0.2;
  const FkChain chain_p = fk_chain(model, qp);
  const Mat6X j1 = jacobian(chain_p);
  const Vec3 dpe = chain_p.ee.pos - chain.ee.pos;

  for (int i = 0; i < k; ++i) {
    EXPECT_LT((j1.col(i).tail<3>() - j0.col(i).tail<3>()).norm(), 1e-13);
    const Vec3 expected_shift = chain.axis[i].cross(dpe);
    EXPECT_LT(
        (j1.col(i).head<3>() - j0.col(i).head<3>() - expected_shift).norm(),
        1e-12);
  }
}

TEST(JacobianPartials, StructuralZeros) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(5);
  const JointState q = random_config(model, rng);
  const auto parts = jacobian_partials(model, q);
  for (int k = 0; k < model.dof(); ++k) {
    for (int i = 0; i <= k; ++i) {
      // Axis of joint i does not depend on q_k for k >= i.
      EXPECT_LT(parts[static_cast<size_t>(k)].col(i).tail<3>().norm(), 1e-15)
          << "k=" << k << " i=" << i;
    }
  }
}

TEST(JacobianPartials, MatchesFiniteDifferences) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(77);
  const double step = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    const JointState q = random_config(model, rng);
    const auto parts = jacobian_partials(model, q);
    for (int k = 0; k < model.dof(); ++k) {
      JointState qp = q, qm = q;
      qp(k) += step;
      qm(k) -= step;
      const Mat6X fd =
          (jacobian(model, qp) - jacobian(model, qm)) / (2.0 * step);
      EXPECT_LT((parts[static_cast<size_t>(k)] - fd).cwiseAbs().maxCoeff(),
                1e-6)
          << "trial=" << trial << " k=" << k;
    }
  }
}

TEST(JacobianPartials, Planar2RTipTermDerivative) {
  // d(J linear col 1)/dq_2 at q = 0 differentiates only the tip term:
  // z x (z x [1,0,0]) = [-1, 0, 0].
  const auto parts = jacobian_partials(planar_2r(), VecX::Zero(2));
  EXPECT_LT((parts[1].col(0).head<3>() - Vec3(-1.0, 0.0, 0.0)).norm(), 1e-14);
}

TEST(Manipulability, ZeroRowGivesZero) {
  MatX j = MatX::Random(6, 7);
  j.row(2).setZero();
  EXPECT_NEAR(manipulability(j), 0.0, 1e-12 * j.cwiseAbs().maxCoeff());
}

TEST(Manipulability, SquareCaseIsDetSquared) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  MatX j(6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) j(r, c) = g(rng);
  }
  const double det = j.determinant();
  EXPECT_NEAR(manipulability(j), det * det,
              1e-9 * std::abs(det * det));
}

TEST(Manipulability, MatchesSvdOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    MatX j(6, 7);
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 7; ++c) j(r, c) = g(rng);
    }
    Eigen::JacobiSVD<MatX> svd(j);
    double prod = 1.0;
    for (int i = 0; i < 6; ++i) {
      prod *= svd.singularValues()(i) * svd.singularValues()(i);
    }
    EXPECT_NEAR(manipulability(j), prod, 1e-9 * prod);
  }
}

TEST(Manipulability, UnderactuatedModelThrows) {
  EXPECT_THROW(manipulability(planar_2r(), VecX::Zero(2)),
               RankDeficientModel);
}

TEST(Manipulability, NonNegativeOverRandomConfigs) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_GE(manipulability(model, random_config(model, rng)), 0.0);
  }
}

TEST(CostH, SingularStretchIsZero) {
  const RobotModel model = load_seven_dof();
  // All-zero configuration: every joint axis passes through a common line,
  // the arm is singular.
  EXPECT_NEAR(cost_h(model, VecX::Zero(7)), 0.0, 1e-18);
}

TEST(CostH, NegativeAwayFromSingularity) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(23);
  int regular = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const JointState q = random_config(model, rng);
    const double h = cost_h(model, q);
    EXPECT_LE(h, 0.0);
    EXPECT_DOUBLE_EQ(h, -manipulability(model, q));
    if (h < -1e-9) ++regular;
  }
  EXPECT_GT(regular, 40);
}

TEST(GradH, MatchesFiniteDifferences) {
  const RobotModel model = load_seven_dof();
  std::mt19937_64 rng(29);
  const double step = 1e-5;
  int tested = 0;
  while (tested < 100) {
    const JointState q = random_config(model, rng);
    if (manipulability(model, q) < 1e-8) continue;  // regular configs only
    const VecX g = grad_h(model, q);
    VecX g_fd(model.dof());
    for (int i = 0; i < model.dof(); ++i) {
      JointState qp = q, qm = q;
      qp(i) += step;
      qm(i) -= step;
      g_fd(i) = (cost_h(model, qp) - cost_h(model, qm)) / (2.0 * step);
    }
    ASSERT_GT(g_fd.norm(), 0.0);
    EXPECT_LT((g - g_fd).norm() / g_fd.norm(), 1e-4) << "q=" << q.transpose();
    ++tested;
  }
}

TEST(GradH, ZeroAtSingularConfiguration) {
  const RobotModel model = load_seven_dof();
  // det(J J^T) >= 0 touches zero at singularities, so the exact gradient
  // vanishes there; the adjugate form reproduces that to roundoff.
  const VecX g = grad_h(model, VecX::Zero(7));
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradH, ContinuousAlongPathIntoSingularity) {
  const RobotModel model = load_seven_dof();
  VecX q_reg(7);
  q_reg << 0.4, 0.7, -0.3, 1.2, 0.5, 0.8, -0.6;
  ASSERT_GT(manipulability(model, q_reg), 1e-8);

  // March q from regular to the stretched singular configuration; a branch
  // jump in the gradient would show up as an adjacent-step difference far
  // beyond the coarse-grid Lipschitz estimate.
  const int coarse = 200;
  double lipschitz = 0.0;
  VecX prev = grad_h(model, q_reg);
  for (int k = 1; k <= coarse; ++k) {
    const double s = static_cast<double>(k) / coarse;
    const VecX g = grad_h(model, VecX((1.0 - s) * q_reg));
    lipschitz = std::max(lipschitz, (g - prev).norm() * coarse);
    prev = g;
  }
  const int fine = 2 * coarse;
  prev = grad_h(model, q_reg);
  for (int k = 1; k <= fine; ++k) {
    const double s = static_cast<double>(k) / fine;
    const VecX g = grad_h(model, VecX((1.0 - s) * q_reg));
    EXPECT_LE((g - prev).norm() * fine, 4.0 * lipschitz) << "s=" << s;
    prev = g;
  }
  EXPECT_LT(prev.norm(), 1e-10);  // endpoint is the singular configuration
}

TEST(GramCostGradient, Planar3RMatchesSymbolicOracle) {
  // 3R planar arm (links 0.8, 0.6, 0.4), 2-row position Jacobian, at
  // q = [0.3, 0.7, -0.4]. Expected values frozen from an independent
  // computer-algebra derivation of grad(-det(J J^T)).
  const double l1 = 0.8, l2 = 0.6, l3 = 0.4;
  const double q1 = 0.3, q2 = 0.7, q3 = -0.4;
  const double s1 = std::sin(q1), c1 = std::cos(q1);
  const double s12 = std::sin(q1 + q2), c12 = std::cos(q1 + q2);
  const double s123 = std::sin(q1 + q2 + q3), c123 = std::cos(q1 + q2 + q3);

  // J = d(x, y)/dq for x = l1 c1 + l2 c12 + l3 c123, y = the sine sum.
  MatX j(2, 3);
  j << -l1 * s1 - l2 * s12 - l3 * s123, -l2 * s12 - l3 * s123, -l3 * s123,
      l1 * c1 + l2 * c12 + l3 * c123, l2 * c12 + l3 * c123, l3 * c123;

  // dJ/dq_k: each entry differentiates its trig terms; q_k only touches
  // terms whose angle sum includes q_k.
  auto make_dj = [&](int k) {
    MatX dj = MatX::Zero(2, 3);
    const double d1 = k <= 0 ? 1.0 : 0.0;
    const double d2 = k <= 1 ? 1.0 : 0.0;
    for (int col = 0; col < 3; ++col) {
      const double a1 = (col == 0 ? d1 : 0.0) * l1;
      const double a2 = (col <= 1 ? d2 : 0.0) * l2;
      dj(0, col) = -a1 * c1 - a2 * c12 - l3 * c123;
      dj(1, col) = -a1 * s1 - a2 * s12 - l3 * s123;
    }
    return dj;
  };
  std::vector<MatX> dj = {make_dj(0), make_dj(1), make_dj(2)};

  const VecX g = gram_cost_gradient(j, dj);
  EXPECT_NEAR(-manipulability(j), -0.171783206300337678, 1e-12);
  EXPECT_NEAR(g(0), 0.0, 1e-12);  // base rotation leaves det invariant
  EXPECT_NEAR(g(1), -0.544043158095299199, 1e-9);
  EXPECT_NEAR(g(2), -0.206729544727827034, 1e-9);
}

TEST(GramAdjugate, MatchesDetTimesInverseWhenRegular) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  MatX j(6, 7);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 7; ++c) j(r, c) = g(rng);
  }
  const MatX gram = j * j.transpose();
  const MatX adj = gram_adjugate(gram);
  const MatX expected = gram.determinant() * gram.inverse();
  EXPECT_LT((adj - expected).cwiseAbs().maxCoeff() /
                expected.cwiseAbs().maxCoeff(),
            1e-9);
}

TEST(RobotModel, RejectsBadLimits) {
  std::vector<DhJoint> joints(2, DhJoint{1.0, 0.0, 0.0, 0.0});
  EXPECT_THROW(RobotModel(joints, VecX::Constant(2, 1.0),
                          VecX::Constant(2, -1.0), VecX::Constant(2, 10.0)),
               DimensionMismatch);
  EXPECT_THROW(RobotModel(joints, VecX::Constant(2, -1.0),
                          VecX::Constant(2, 1.0), VecX::Constant(2, 0.0)),
               DimensionMismatch);
  EXPECT_THROW(RobotModel({}, VecX(), VecX(), VecX()), DimensionMismatch);
}

}  // namespace
}  // namespace demoreplay
