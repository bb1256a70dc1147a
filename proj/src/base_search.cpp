#include "demoreplay/base_search.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "demoreplay/errors.hpp"

namespace demoreplay {

void GridSpec::validate() const {
  if (!(x_min < x_max) && nx > 1) {
    throw DimensionMismatch("GridSpec: x_min must be < x_max");
  }
  if (!(y_min < y_max) && ny > 1) {
    throw DimensionMismatch("GridSpec: y_min must be < y_max");
  }
  if (nx < 1 || ny < 1) {
    throw DimensionMismatch("GridSpec: nx, ny must be >= 1");
  }
}

double GridSpec::x_at(int ix) const {
  return nx == 1 ? x_min
                 : x_min + (x_max - x_min) * static_cast<double>(ix) /
                               static_cast<double>(nx - 1);
}

double GridSpec::y_at(int iy) const {
  return ny == 1 ? y_min
                 : y_min + (y_max - y_min) * static_cast<double>(iy) /
                               static_cast<double>(ny - 1);
}

Pose GridSpec::base_pose(int ix, int iy) const {
  Pose p;
  p.rot = so3_exp(Vec3(0.0, 0.0, yaw));
  p.pos = Vec3(x_at(ix), y_at(iy), z);
  return p;
}

Pose scenario_fk(const Pose& base, const RobotModel& model,
                 const JointState& q) {
  return pose_compose(base, fk(model, q));
}

double trapezoid_mean(const VecX& times, const VecX& values) {
  if (times.size() != values.size()) {
    throw DimensionMismatch("trapezoid_mean: times/values length mismatch");
  }
  const Eigen::Index n = times.size();
  if (n < 1) throw ZeroDuration("trapezoid_mean: empty series");
  const double span = times(n - 1) - times(0);
  if (!(span > 0.0)) throw ZeroDuration("trapezoid_mean: zero time span");

  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    acc += 0.5 * (values(k) + values(k + 1)) * (times(k + 1) - times(k));
  }
  return acc / span;
}

double average_manipulability(const RobotModel& model, const Pose& base,
                              const DemoTrajectory& demo, const JointState& q0,
                              const PmpGains& gains, JointTrajectory* solved) {
  if (demo.size() < 2 || !(demo.duration() > 0.0)) {
    throw ZeroDuration("average_manipulability: demonstration spans no time");
  }
  // Solve with the demonstration expressed in the scenario base frame; the
  // manipulability integrand depends only on the resulting q(t).
  const DemoTrajectory local = demo.transformed(pose_inverse(base));
  JointTrajectory traj = solve_trajectory(model, q0, local, gains);

  VecX det_vals(traj.size());
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    det_vals(k) = manipulability(model, JointState(traj.states.row(k)));
  }
  const double mean = trapezoid_mean(traj.times, det_vals);
  if (solved != nullptr) *solved = std::move(traj);
  return mean;
}

GridResult grid_search(const RobotModel& model, const DemoTrajectory& demo,
                       const GridSpec& grid, const JointState& q0,
                       const PmpGains& gains, int workers) {
  grid.validate();
  const int total = grid.nx * grid.ny;
  std::vector<Scenario> all(static_cast<size_t>(total));

  const auto evaluate = [&](int idx) {
    const int ix = idx / grid.ny;
    const int iy = idx % grid.ny;
    Scenario& sc = all[static_cast<size_t>(idx)];
    sc.base = grid.base_pose(ix, iy);
    sc.x = grid.x_at(ix);
    sc.y = grid.y_at(iy);
    try {
      JointTrajectory solved;
      sc.score =
          average_manipulability(model, sc.base, demo, q0, gains, &solved);
      sc.solved = std::move(solved);
      sc.status = ScenarioStatus::ok;
    } catch (const DivergedTracking&) {
      sc.score = -std::numeric_limits<double>::infinity();
      sc.status = ScenarioStatus::diverged;
    }
  };

  const int nthreads = std::max(1, std::min(workers, total));
  if (nthreads == 1) {
    for (int i = 0; i < total; ++i) evaluate(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
          evaluate(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  Scenario best = argmax_scenario(all);
  return GridResult{std::move(best), std::move(all)};
}

const Scenario& argmax_scenario(const std::vector<Scenario>& all) {
  // Reduce over stored scores only, in a fixed order; evaluation scheduling
  // cannot change the winner. Exact ties fall to lower x, then lower y.
  const Scenario* best = nullptr;
  for (const Scenario& sc : all) {
    if (sc.status != ScenarioStatus::ok) continue;
    if (best == nullptr || sc.score > best->score ||
        (sc.score == best->score &&
         (sc.x < best->x || (sc.x == best->x && sc.y < best->y)))) {
      best = &sc;
    }
  }
  if (best == nullptr) {
    throw AllDiverged("grid_search: no scenario converged");
  }
  return *best;
}

}  // namespace demoreplay
