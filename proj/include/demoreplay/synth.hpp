#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "demoreplay/markers.hpp"
#include "demoreplay/trajectory.hpp"

namespace demoreplay {

struct Waypoint {
  double t = 0.0;
  Pose pose;
  double aperture = 0.0;
};

/// Ground-truth synthetic demonstration recipe: waypoints interpolated with
/// rest-to-rest minimum-jerk segments, sampled at `rate`, with optional
/// position noise, trial timing jitter, and marker noise downstream.
struct SynthSpec {
  std::vector<Waypoint> waypoints;
  double noise_sigma_pos = 0.0;     // m, per sampled position
  double noise_sigma_marker = 0.0;  // m, per marker coordinate
  double rate = 100.0;              // Hz
  int n_trials = 4;
  double trial_jitter = 0.0;        // s, waypoint timing jitter
  std::uint64_t seed = 0;

  void validate() const;
};

/// Quintic rest-to-rest profile s(0)=0, s(1)=1 with zero boundary velocity
/// and acceleration, and its derivative.
double minjerk_s(double tau);
double minjerk_ds(double tau);

DemoTrajectory gen_pose_trajectory(const SynthSpec& spec);
DemoTrajectory gen_pose_trajectory(const SynthSpec& spec,
                                   std::mt19937_64& rng);

/// Project the trajectory through a marker template: per-sample marker
/// clouds with Gaussian noise and optional per-label dropout.
std::vector<MarkerFrame> gen_marker_frames(const DemoTrajectory& traj,
                                           const RigidTemplate& tmpl,
                                           double sigma, std::uint64_t seed,
                                           double dropout_prob = 0.0);

/// n_trials perturbed copies sharing the sample clock: interior waypoint
/// times jittered, per-sample position noise. Deterministic under seed.
std::vector<DemoTrajectory> gen_paced_trials(const SynthSpec& spec);

}  // namespace demoreplay
