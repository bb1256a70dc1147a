#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "demoreplay/base_search.hpp"
#include "demoreplay/gmm.hpp"
#include "demoreplay/markers.hpp"
#include "demoreplay/pmp.hpp"
#include "demoreplay/replay.hpp"
#include "demoreplay/robot.hpp"

namespace demoreplay::io {

namespace fs = std::filesystem;

/// All writers go through a temp-file-then-rename so partially written
/// outputs never appear under the final name.
void atomic_write(const fs::path& path, const std::string& contents);

/// Robot config: JSON with joints[] = {a, alpha, d, theta_offset}, q_min[],
/// q_max[], tau_lim[], optional q_home[]. SI units (m, rad, N*m).
RobotModel load_robot(const fs::path& path);

/// Marker CSV, long format: header `t,label,x,y,z`, one row per visible
/// marker per frame, frames ordered by time.
std::vector<MarkerFrame> load_markers(const fs::path& path);
void save_markers(const fs::path& path, const std::vector<MarkerFrame>& frames);

/// Template CSV: header `label,x,y,z`.
RigidTemplate load_template(const fs::path& path);
void save_template(const fs::path& path, const RigidTemplate& tmpl);

/// Demonstration CSV: header `t,px,py,pz,rx,ry,rz,d`; r is the rotation log,
/// written branch-continuously row to row.
DemoTrajectory load_demo(const fs::path& path);
void save_demo(const fs::path& path, const DemoTrajectory& demo);

/// Joint trajectory CSV: header `t,q1..qD,err_lin,err_ang`.
JointTrajectory load_joint_trajectory(const fs::path& path);
void save_joint_trajectory(const fs::path& path, const JointTrajectory& traj);

/// Wrench CSV: header `t,fx,fy,fz,tx,ty,tz,frame`.
WrenchSeries load_wrench(const fs::path& path);
void save_wrench(const fs::path& path, const WrenchSeries& series);

/// Mixture JSON; doubles round-trip exactly.
void save_mixture(const fs::path& path, const GaussianMixture& mixture);
GaussianMixture load_mixture(const fs::path& path);

/// Whitespace-separated joint offsets, one value per joint.
VecX load_delta_q(const fs::path& path, int dof);

/// Score field CSV `x,y,score,status` plus an SVG heatmap of the feasible
/// region (diverged cells in grey).
void save_score_field(const fs::path& path, const std::vector<Scenario>& all);
void save_score_svg(const fs::path& path, const GridSpec& grid,
                    const std::vector<Scenario>& all);

std::string format_double(double v);  // shortest exact round-trip decimal

}  // namespace demoreplay::io
