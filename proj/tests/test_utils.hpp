#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "demoreplay/io.hpp"
#include "demoreplay/robot.hpp"
#include "demoreplay/se3.hpp"

namespace demoreplay::testing {

inline std::filesystem::path data_dir() {
  return std::filesystem::path(DEMOREPLAY_DATA_DIR);
}

inline RobotModel load_seven_dof() {
  return io::load_robot(data_dir() / "robots" / "seven_dof.json");
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("demoreplay_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-6) v = Vec3(g(rng), g(rng), g(rng));
  return v.normalized();
}

inline RotVec random_rotvec(std::mt19937_64& rng, double max_angle = M_PI - 0.01) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return u(rng) * random_unit(rng);
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  return so3_exp(random_rotvec(rng));
}

inline Pose random_pose(std::mt19937_64& rng, double pos_scale = 1.0) {
  std::uniform_real_distribution<double> u(-pos_scale, pos_scale);
  return Pose{random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
}

// Uniform in-limit configuration.
inline JointState random_config(const RobotModel& model,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  JointState q(model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    q(i) = model.q_min()(i) +
           u(rng) * (model.q_max()(i) - model.q_min()(i));
  }
  return q;
}

inline double rel_err(double actual, double expected, double floor = 1e-12) {
  return std::abs(actual - expected) /
         std::max(std::abs(expected), floor);
}

}  // namespace demoreplay::testing
