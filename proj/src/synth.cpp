#include "demoreplay/synth.hpp"

#include <algorithm>
#include <cmath>

#include "demoreplay/errors.hpp"

namespace demoreplay {

void SynthSpec::validate() const {
  if (waypoints.size() < 2) {
    throw DimensionMismatch("SynthSpec: needs >= 2 waypoints");
  }
  for (size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].t > waypoints[i - 1].t)) {
      throw DimensionMismatch("SynthSpec: waypoint times must increase");
    }
  }
  if (noise_sigma_pos < 0.0 || noise_sigma_marker < 0.0 ||
      trial_jitter < 0.0 || !(rate > 0.0) || n_trials < 1) {
    throw DimensionMismatch("SynthSpec: bad noise/rate/trial parameters");
  }
}

double minjerk_s(double tau) {
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

double minjerk_ds(double tau) {
  return tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau));
}

namespace {

struct Segment {
  double t0, t1;
  Pose a, b;
  double d0, d1;
  RotVec rel;  // log(a.rot^T b.rot)
};

std::vector<Segment> build_segments(const std::vector<Waypoint>& wps) {
  std::vector<Segment> segs;
  segs.reserve(wps.size() - 1);
  for (size_t i = 0; i + 1 < wps.size(); ++i) {
    Segment s;
    s.t0 = wps[i].t;
    s.t1 = wps[i + 1].t;
    s.a = wps[i].pose;
    s.b = wps[i + 1].pose;
    s.d0 = wps[i].aperture;
    s.d1 = wps[i + 1].aperture;
    s.rel = orientation_error(s.a.rot, s.b.rot);
    segs.push_back(s);
  }
  return segs;
}

void sample_at(const std::vector<Waypoint>& wps,
               const std::vector<Segment>& segs, double t, Pose* pose,
               double* d) {
  // Exact waypoint times return the waypoint itself.
  for (const auto& w : wps) {
    if (t == w.t) {
      *pose = w.pose;
      *d = w.aperture;
      return;
    }
  }
  size_t i = 0;
  while (i + 1 < segs.size() && t > segs[i].t1) ++i;
  const Segment& s = segs[i];
  const double tau =
      std::clamp((t - s.t0) / (s.t1 - s.t0), 0.0, 1.0);
  const double u = minjerk_s(tau);
  pose->pos = s.a.pos + u * (s.b.pos - s.a.pos);
  pose->rot = s.a.rot * so3_exp(u * s.rel);
  *d = s.d0 + (t - s.t0) / (s.t1 - s.t0) * (s.d1 - s.d0);
}

DemoTrajectory sample_course(const std::vector<Waypoint>& wps, double rate,
                             double sigma_pos, std::mt19937_64& rng) {
  const auto segs = build_segments(wps);
  const double t0 = wps.front().t;
  const double t1 = wps.back().t;
  // t_k = t0 + k/rate; the exact final waypoint time is appended when the
  // grid misses it so trajectories end at rest on the last waypoint.
  std::vector<double> times;
  for (long k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    if (t > t1) break;
    times.push_back(t);
  }
  if (times.back() < t1) times.push_back(t1);

  DemoTrajectory out;
  out.times = Eigen::Map<VecX>(times.data(),
                               static_cast<Eigen::Index>(times.size()));
  out.poses.resize(times.size());
  out.aperture.resize(static_cast<Eigen::Index>(times.size()));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t i = 0; i < times.size(); ++i) {
    double d = 0.0;
    sample_at(wps, segs, times[i], &out.poses[i], &d);
    out.aperture(static_cast<Eigen::Index>(i)) = std::max(d, 0.0);
    if (sigma_pos > 0.0) {
      out.poses[i].pos += sigma_pos * Vec3(gauss(rng), gauss(rng), gauss(rng));
    }
  }
  return out;
}

}  // namespace

DemoTrajectory gen_pose_trajectory(const SynthSpec& spec,
                                   std::mt19937_64& rng) {
  spec.validate();
  return sample_course(spec.waypoints, spec.rate, spec.noise_sigma_pos, rng);
}

DemoTrajectory gen_pose_trajectory(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return gen_pose_trajectory(spec, rng);
}

std::vector<MarkerFrame> gen_marker_frames(const DemoTrajectory& traj,
                                           const RigidTemplate& tmpl,
                                           double sigma, std::uint64_t seed,
                                           double dropout_prob) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<MarkerFrame> frames;
  frames.reserve(static_cast<size_t>(traj.size()));
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    MarkerFrame f;
    f.t = traj.times(i);
    const Pose& p = traj.poses[static_cast<size_t>(i)];
    for (const auto& [label, ref] : tmpl.ref_points) {
      const bool dropped = dropout_prob > 0.0 && unif(rng) < dropout_prob;
      Vec3 obs = p.rot * ref + p.pos;
      if (sigma > 0.0) {
        obs += sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
      }
      if (!dropped) f.points.emplace(label, obs);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<DemoTrajectory> gen_paced_trials(const SynthSpec& spec) {
  spec.validate();
  std::vector<DemoTrajectory> trials;
  trials.reserve(static_cast<size_t>(spec.n_trials));
  for (int j = 0; j < spec.n_trials; ++j) {
    // Independent per-trial stream so trial count changes keep prior trials.
    std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ULL *
                                        static_cast<std::uint64_t>(j + 1));
    std::vector<Waypoint> wps = spec.waypoints;
    if (spec.trial_jitter > 0.0) {
      std::normal_distribution<double> gauss(0.0, spec.trial_jitter);
      for (size_t i = 1; i + 1 < wps.size(); ++i) {
        wps[i].t += gauss(rng);
      }
      // Keep ordering sane under large jitter draws.
      for (size_t i = 1; i < wps.size(); ++i) {
        wps[i].t = std::max(wps[i].t, wps[i - 1].t + 1e-3);
      }
    }
    DemoTrajectory traj =
        sample_course(wps, spec.rate, spec.noise_sigma_pos, rng);
    trials.push_back(std::move(traj));
  }
  return trials;
}

}  // namespace demoreplay
