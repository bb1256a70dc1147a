#include "demoreplay/base_search.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_utils.hpp"

namespace demoreplay {
namespace {

using testing::load_seven_dof;

DemoTrajectory reachable_demo(const RobotModel& model, double duration,
                              double rate) {
  // Gentle line around the home end-effector pose, lifted into the world a
  // little so off-center bases can still reach it.
  const Pose start = fk(model, model.q_home());
  DemoTrajectory demo;
  const auto n = static_cast<Eigen::Index>(duration * rate) + 1;
  demo.times.resize(n);
  demo.aperture = VecX::Zero(n);
  demo.poses.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    const double u = s * s * (3.0 - 2.0 * s);
    demo.times(i) = static_cast<double>(i) / rate;
    Pose p = start;
    p.pos += u * Vec3(0.05, 0.08, -0.03);
    demo.poses[static_cast<size_t>(i)] = p;
  }
  return demo;
}

PmpGains fast_gains() {
  PmpGains g;
  g.lambda = 1e-3;
  return g;
}

TEST(ScenarioFk, IdentityBaseEqualsFk) {
  const RobotModel model = load_seven_dof();
  const JointState q = model.q_home();
  const Pose a = scenario_fk(Pose{}, model, q);
  const Pose b = fk(model, q);
  EXPECT_TRUE(a.rot.matrix().isApprox(b.rot.matrix(), 1e-15));
  EXPECT_TRUE(a.pos.isApprox(b.pos, 1e-15));
}

TEST(ScenarioFk, PureTranslationShifts) {
  const RobotModel model = load_seven_dof();
  const JointState q = model.q_home();
  Pose base;
  base.pos = Vec3(1.0, 0.0, 0.0);
  const Pose shifted = scenario_fk(base, model, q);
  EXPECT_LT((shifted.pos - fk(model, q).pos - Vec3(1.0, 0.0, 0.0)).norm(),
            1e-15);
}

TEST(ScenarioFk, GeneralBaseMatchesComposeOracle) {
  const RobotModel model = load_seven_dof();
  const JointState q = model.q_home();
  Pose base;
  base.rot = so3_exp(RotVec(0.0, 0.0, M_PI_2));
  base.pos = Vec3(0.3, -0.2, 0.1);
  const Pose got = scenario_fk(base, model, q);
  const Pose expect = pose_compose(base, fk(model, q));
  EXPECT_TRUE(got.rot.matrix().isApprox(expect.rot.matrix(), 1e-15));
  EXPECT_TRUE(got.pos.isApprox(expect.pos, 1e-15));
}

TEST(TrapezoidMean, TwoSampleHandFormula) {
  VecX t(2), v(2);
  t << 0.0, 2.0;
  v << 3.0, 7.0;
  EXPECT_DOUBLE_EQ(trapezoid_mean(t, v), 5.0);  // (a + b) / 2 exactly
}

TEST(TrapezoidMean, NonUniformSpacing) {
  VecX t(3), v(3);
  t << 0.0, 1.0, 3.0;
  v << 2.0, 4.0, 1.0;
  // (0.5*(2+4)*1 + 0.5*(4+1)*2) / 3
  EXPECT_DOUBLE_EQ(trapezoid_mean(t, v), (3.0 + 5.0) / 3.0);
}

TEST(TrapezoidMean, ZeroSpanThrows) {
  VecX t(1), v(1);
  t << 1.0;
  v << 2.0;
  EXPECT_THROW(trapezoid_mean(t, v), ZeroDuration);
}

TEST(AverageManipulability, ConstantTrajectoryEqualsPointwiseDet) {
  const RobotModel model = load_seven_dof();
  const JointState q0 = model.q_home();
  PmpGains gains;
  gains.lambda = 0.0;  // hold q0 exactly
  DemoTrajectory demo;
  demo.times.resize(3);
  demo.times << 0.0, 0.5, 1.0;
  demo.poses.assign(3, fk(model, q0));
  demo.aperture = VecX::Zero(3);

  const double mean =
      average_manipulability(model, Pose{}, demo, q0, gains);
  EXPECT_NEAR(mean, manipulability(model, q0),
              1e-12 * manipulability(model, q0));
}

TEST(AverageManipulability, SingleSampleThrowsZeroDuration) {
  const RobotModel model = load_seven_dof();
  DemoTrajectory demo;
  demo.times.resize(1);
  demo.times << 0.0;
  demo.poses.assign(1, fk(model, model.q_home()));
  demo.aperture = VecX::Zero(1);
  EXPECT_THROW(average_manipulability(model, Pose{}, demo, model.q_home(),
                                      PmpGains{}),
               ZeroDuration);
}

TEST(AverageManipulability, DivergesForHopelessBase) {
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 1.0, 10.0);
  Pose base;
  base.pos = Vec3(5.0, 5.0, 0.0);
  EXPECT_THROW(average_manipulability(model, base, demo, model.q_home(),
                                      fast_gains()),
               DivergedTracking);
}

TEST(GridSearch, SinglePointGridReturnsIt) {
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 1.0, 10.0);
  GridSpec grid;
  grid.nx = grid.ny = 1;
  grid.x_min = grid.x_max = 0.1;
  grid.y_min = grid.y_max = -0.05;
  const GridResult res =
      grid_search(model, demo, grid, model.q_home(), fast_gains());
  EXPECT_EQ(res.all.size(), 1u);
  EXPECT_DOUBLE_EQ(res.best.x, 0.1);
  EXPECT_DOUBLE_EQ(res.best.y, -0.05);
  EXPECT_EQ(res.best.status, ScenarioStatus::ok);
}

TEST(GridSearch, MatchesBruteForceRecomputation) {
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 1.0, 10.0);
  const JointState q0 = model.q_home();
  const PmpGains gains = fast_gains();

  GridSpec grid;
  grid.nx = grid.ny = 4;
  grid.x_min = -0.6;
  grid.x_max = 0.6;
  grid.y_min = -0.6;
  grid.y_max = 0.6;
  const GridResult res = grid_search(model, demo, grid, q0, gains, 2);

  // Independent exhaustive re-evaluation, serial, fresh calls.
  double best_score = -std::numeric_limits<double>::infinity();
  double best_x = 0.0, best_y = 0.0;
  int converged = 0;
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      try {
        const double s = average_manipulability(
            model, grid.base_pose(ix, iy), demo, q0, gains);
        ++converged;
        if (s > best_score) {
          best_score = s;
          best_x = grid.x_at(ix);
          best_y = grid.y_at(iy);
        }
      } catch (const DivergedTracking&) {
      }
    }
  }
  ASSERT_GT(converged, 0);
  EXPECT_EQ(res.best.score, best_score);  // bit identical
  EXPECT_EQ(res.best.x, best_x);
  EXPECT_EQ(res.best.y, best_y);
}

TEST(GridSearch, DeterministicAcrossWorkerCounts) {
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 0.8, 10.0);
  GridSpec grid;
  grid.nx = grid.ny = 3;
  grid.x_min = -0.4;
  grid.x_max = 0.4;
  grid.y_min = -0.4;
  grid.y_max = 0.4;
  const GridResult a =
      grid_search(model, demo, grid, model.q_home(), fast_gains(), 1);
  const GridResult b =
      grid_search(model, demo, grid, model.q_home(), fast_gains(), 8);
  EXPECT_EQ(a.best.score, b.best.score);
  EXPECT_EQ(a.best.x, b.best.x);
  EXPECT_EQ(a.best.y, b.best.y);
  for (size_t i = 0; i < a.all.size(); ++i) {
    EXPECT_EQ(a.all[i].score, b.all[i].score) << i;
    EXPECT_EQ(a.all[i].status, b.all[i].status) << i;
  }
}

TEST(GridSearch, FarCellsRetainedAsDiverged) {
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 0.8, 10.0);
  GridSpec grid;  // paper-style span: corners are out of reach
  grid.nx = grid.ny = 3;
  const GridResult res =
      grid_search(model, demo, grid, model.q_home(), fast_gains());
  int diverged = 0;
  for (const auto& sc : res.all) {
    if (sc.status == ScenarioStatus::diverged) {
      ++diverged;
      EXPECT_TRUE(std::isinf(sc.score));
      EXPECT_LT(sc.score, 0.0);
    }
  }
  EXPECT_GT(diverged, 0);
  EXPECT_EQ(res.all.size(), 9u);
}

TEST(GridSearch, AllDivergedThrows) {
  const RobotModel model = load_seven_dof();
  DemoTrajectory demo = reachable_demo(model, 0.5, 10.0);
  for (auto& p : demo.poses) p.pos += Vec3(30.0, 0.0, 0.0);
  GridSpec grid;
  grid.nx = grid.ny = 2;
  EXPECT_THROW(
      grid_search(model, demo, grid, model.q_home(), fast_gains(), 2),
      AllDiverged);
}

TEST(GridSearch, MonotoneUnderGridRefinement) {
  // 5x5 over the same span contains the 3x3 points, so the best score can
  // only go up; shared points re-evaluate bit-identically.
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 0.8, 10.0);
  GridSpec coarse;
  coarse.nx = coarse.ny = 3;
  coarse.x_min = coarse.y_min = -0.5;
  coarse.x_max = coarse.y_max = 0.5;
  GridSpec fine = coarse;
  fine.nx = fine.ny = 5;
  const GridResult a =
      grid_search(model, demo, coarse, model.q_home(), fast_gains(), 2);
  const GridResult b =
      grid_search(model, demo, fine, model.q_home(), fast_gains(), 2);
  EXPECT_GE(b.best.score, a.best.score);
}

TEST(GridSearch, ScoreMultisetInvariantUnderWorldRotation) {
  // Rotating demo and grid together by 90 deg about z maps the square grid
  // onto itself with the base yaw following, so the score multiset must be
  // preserved.
  const RobotModel model = load_seven_dof();
  const DemoTrajectory demo = reachable_demo(model, 0.8, 10.0);
  const JointState q0 = model.q_home();
  GridSpec grid;
  grid.nx = grid.ny = 3;
  grid.x_min = grid.y_min = -0.5;
  grid.x_max = grid.y_max = 0.5;

  Pose w;
  w.rot = so3_exp(RotVec(0.0, 0.0, M_PI_2));
  GridSpec rotated = grid;
  rotated.yaw = M_PI_2;

  const GridResult a = grid_search(model, demo, grid, q0, fast_gains(), 2);
  const GridResult b =
      grid_search(model, demo.transformed(w), rotated, q0, fast_gains(), 2);

  std::vector<double> sa, sb;
  for (const auto& sc : a.all) {
    if (sc.status == ScenarioStatus::ok) sa.push_back(sc.score);
  }
  for (const auto& sc : b.all) {
    if (sc.status == ScenarioStatus::ok) sb.push_back(sc.score);
  }
  ASSERT_EQ(sa.size(), sb.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (size_t i = 0; i < sa.size(); ++i) {
    EXPECT_NEAR(sa[i], sb[i], 1e-9 * std::max(1.0, std::abs(sa[i]))) << i;
  }
}

TEST(ArgmaxScenario, ExactTieFallsToLowerXThenLowerY) {
  std::vector<Scenario> all(4);
  all[0] = {Pose{}, 0.5, 0.5, 1.0, ScenarioStatus::ok, {}};
  all[1] = {Pose{}, 0.5, -0.5, 2.0, ScenarioStatus::ok, {}};
  all[2] = {Pose{}, -0.5, 0.5, 2.0, ScenarioStatus::ok, {}};
  all[3] = {Pose{}, -0.5, -0.5, 2.0, ScenarioStatus::diverged, {}};
  const Scenario& best = argmax_scenario(all);
  EXPECT_EQ(best.x, -0.5);  // tie between (0.5,-0.5) and (-0.5,0.5)
  EXPECT_EQ(best.y, 0.5);

  std::vector<Scenario> same_x(2);
  same_x[0] = {Pose{}, 0.0, 0.7, 3.0, ScenarioStatus::ok, {}};
  same_x[1] = {Pose{}, 0.0, -0.7, 3.0, ScenarioStatus::ok, {}};
  EXPECT_EQ(argmax_scenario(same_x).y, -0.7);

  std::vector<Scenario> none(1);
  none[0].status = ScenarioStatus::diverged;
  EXPECT_THROW(argmax_scenario(none), AllDiverged);
}

TEST(GridSpec, ValidationAndSpacing) {
  GridSpec g;
  g.nx = 0;
  EXPECT_THROW(g.validate(), DimensionMismatch);
  g = GridSpec{};
  EXPECT_DOUBLE_EQ(g.x_at(0), -1.0);
  EXPECT_DOUBLE_EQ(g.x_at(9), 1.0);
  EXPECT_NEAR(g.x_at(1) - g.x_at(0), 2.0 / 9.0, 1e-15);
}

}  // namespace
}  // namespace demoreplay
