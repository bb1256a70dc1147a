#pragma once

#include <map>
#include <string>
#include <vector>

#include "demoreplay/trajectory.hpp"

namespace demoreplay {

/// One motion-capture frame: visible labeled markers only. Occluded markers
/// are simply absent from the map.
struct MarkerFrame {
  double t = 0.0;
  std::map<std::string, Vec3> points;  // label -> position, m, world frame
};

/// Marker positions in the gripper body frame; the registration target.
struct RigidTemplate {
  std::map<std::string, Vec3> ref_points;

  /// Throws TooFewMarkers (< 3 points) or DegenerateGeometry (collinear:
  /// second covariance eigenvalue below 1e-6 of the largest).
  static RigidTemplate validated(std::map<std::string, Vec3> points);
};

struct Registration {
  Pose pose;       // gripper body frame in world
  double rms = 0;  // residual RMS over the markers used, m
  int n_used = 0;
};

/// Least-squares rigid transform mapping template points onto the observed
/// frame (centroid + SVD with determinant sign correction). Uses the labels
/// present in both; throws TooFewMarkers / DegenerateGeometry on the
/// common subset.
Registration register_rigid(const RigidTemplate& tmpl,
                            const MarkerFrame& frame);

/// Per-frame registration followed by first-order geodesic smoothing with
/// factor alpha in (0, 1] (alpha = 1: raw registrations). Frames that fail
/// to register hold the previous pose and are flagged in `held`; leading
/// unregistrable frames are dropped. Aperture is left zero — see aperture().
/// Throws NoRegistrableFrames when nothing registers.
DemoTrajectory filter_trajectory(const std::vector<MarkerFrame>& frames,
                                 const RigidTemplate& tmpl, double alpha);

/// Finger-marker distance per frame. Samples with either marker missing are
/// forward-filled; a leading gap is back-filled from the first observation.
VecX aperture(const std::vector<MarkerFrame>& frames,
              const std::string& finger_a, const std::string& finger_b);

/// filter_trajectory + aperture with sample alignment (the aperture series
/// is trimmed to the frames the filter kept).
DemoTrajectory build_demo(const std::vector<MarkerFrame>& frames,
                          const RigidTemplate& tmpl, double alpha,
                          const std::string& finger_a,
                          const std::string& finger_b);

}  // namespace demoreplay
