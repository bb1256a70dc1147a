#include "demoreplay/markers.hpp"

#include <cmath>

#include "demoreplay/errors.hpp"

namespace demoreplay {

namespace {

// Eigenvalues of the point-set covariance, descending. Collinear sets have
// a vanishing second eigenvalue. (Any 3-point set is planar, so the third
// eigenvalue says nothing about registrability.)
void covariance_check(const std::vector<Vec3>& pts, const char* what) {
  if (pts.size() < 3) {
    throw TooFewMarkers(std::string(what) + ": needs >= 3 markers, got " +
                        std::to_string(pts.size()));
  }
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 lam = es.eigenvalues();  // ascending
  if (!(lam(1) > 1e-6 * lam(2))) {
    throw DegenerateGeometry(std::string(what) + ": markers are collinear");
  }
}

}  // namespace

RigidTemplate RigidTemplate::validated(std::map<std::string, Vec3> points) {
  std::vector<Vec3> pts;
  pts.reserve(points.size());
  for (const auto& [label, p] : points) pts.push_back(p);
  covariance_check(pts, "RigidTemplate");
  return RigidTemplate{std::move(points)};
}

Registration register_rigid(const RigidTemplate& tmpl,
                            const MarkerFrame& frame) {
  std::vector<Vec3> ref, obs;
  for (const auto& [label, p] : tmpl.ref_points) {
    const auto it = frame.points.find(label);
    if (it == frame.points.end()) continue;
    ref.push_back(p);
    obs.push_back(it->second);
  }
  covariance_check(ref, "register_rigid");

  const auto n = static_cast<double>(ref.size());
  Vec3 c_ref = Vec3::Zero(), c_obs = Vec3::Zero();
  for (size_t i = 0; i < ref.size(); ++i) {
    c_ref += ref[i];
    c_obs += obs[i];
  }
  c_ref /= n;
  c_obs /= n;

  Mat3 h = Mat3::Zero();
  for (size_t i = 0; i < ref.size(); ++i) {
    h += (ref[i] - c_ref) * (obs[i] - c_obs).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();

  Registration reg;
  reg.pose.rot = unchecked_rotation(r);
  reg.pose.pos = c_obs - r * c_ref;
  reg.n_used = static_cast<int>(ref.size());
  double ss = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    ss += (obs[i] - (r * ref[i] + reg.pose.pos)).squaredNorm();
  }
  reg.rms = std::sqrt(ss / n);
  return reg;
}

DemoTrajectory filter_trajectory(const std::vector<MarkerFrame>& frames,
                                 const RigidTemplate& tmpl, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw DimensionMismatch("filter_trajectory: alpha must be in (0, 1]");
  }

  DemoTrajectory out;
  std::vector<double> times;
  std::vector<Pose> poses;
  std::vector<uint8_t> held;

  bool have_pose = false;
  Pose sm;
  for (const auto& frame : frames) {
    Pose meas;
    bool ok = true;
    try {
      meas = register_rigid(tmpl, frame).pose;
    } catch (const TooFewMarkers&) {
      ok = false;
    } catch (const DegenerateGeometry&) {
      ok = false;
    }

    if (!have_pose) {
      if (!ok) continue;  // leading unregistrable frames are dropped
      sm = meas;
      have_pose = true;
    } else if (ok) {
      sm.pos += alpha * (meas.pos - sm.pos);
      sm.rot = sm.rot * so3_exp(alpha * orientation_error(sm.rot, meas.rot));
    }
    times.push_back(frame.t);
    poses.push_back(sm);
    held.push_back(ok ? 0 : 1);
  }
  if (!have_pose) {
    throw NoRegistrableFrames("filter_trajectory: no frame registered");
  }

  out.times = Eigen::Map<VecX>(times.data(),
                               static_cast<Eigen::Index>(times.size()));
  check_strictly_increasing(out.times, "filter_trajectory");
  out.poses = std::move(poses);
  out.held = std::move(held);
  out.aperture = VecX::Zero(out.times.size());
  return out;
}

VecX aperture(const std::vector<MarkerFrame>& frames,
              const std::string& finger_a, const std::string& finger_b) {
  const auto n = static_cast<Eigen::Index>(frames.size());
  VecX d(n);
  double last = -1.0;
  Eigen::Index first_valid = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pts = frames[static_cast<size_t>(i)].points;
    const auto a = pts.find(finger_a);
    const auto b = pts.find(finger_b);
    if (a != pts.end() && b != pts.end()) {
      last = (a->second - b->second).norm();
      if (first_valid < 0) first_valid = i;
    }
    d(i) = last;  // forward fill; leading gap patched below
  }
  if (first_valid < 0) {
    throw TooFewMarkers("aperture: finger markers never observed together");
  }
  d.head(first_valid).setConstant(d(first_valid));  // back-fill leading gap
  return d;
}

DemoTrajectory build_demo(const std::vector<MarkerFrame>& frames,
                          const RigidTemplate& tmpl, double alpha,
                          const std::string& finger_a,
                          const std::string& finger_b) {
  DemoTrajectory demo = filter_trajectory(frames, tmpl, alpha);
  const VecX d = aperture(frames, finger_a, finger_b);
  // filter_trajectory only drops frames at the front; align by count.
  demo.aperture = d.tail(demo.size());
  return demo;
}

}  // namespace demoreplay
