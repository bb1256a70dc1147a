#include "demoreplay/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "demoreplay/errors.hpp"

namespace demoreplay::io {

using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double to_double(const std::string& s, const fs::path& path) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in " + path.string());
  }
}

// Lines of a CSV file after the header, blank lines skipped.
std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               const std::string& header) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw ParseError(path.string() + ": expected header '" + header +
                     "', got '" + line + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, path);
}

RobotModel load_robot(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    std::vector<DhJoint> joints;
    for (const auto& row : j.at("joints")) {
      DhJoint dj;
      dj.a = row.at("a").get<double>();
      dj.alpha = row.at("alpha").get<double>();
      dj.d = row.at("d").get<double>();
      dj.theta_offset = row.at("theta_offset").get<double>();
      joints.push_back(dj);
    }
    const auto vec = [&](const char* key) {
      const auto& arr = j.at(key);
      VecX v(static_cast<Eigen::Index>(arr.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = arr[static_cast<size_t>(i)].get<double>();
      }
      return v;
    };
    VecX q_home;
    if (j.contains("q_home")) q_home = vec("q_home");
    return RobotModel(std::move(joints), vec("q_min"), vec("q_max"),
                      vec("tau_lim"), q_home);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<MarkerFrame> load_markers(const fs::path& path) {
  const auto rows = read_csv(path, "t,label,x,y,z");
  std::vector<MarkerFrame> frames;
  for (const auto& r : rows) {
    if (r.size() != 5) throw ParseError(path.string() + ": bad marker row");
    const double t = to_double(r[0], path);
    if (frames.empty() || t > frames.back().t) {
      frames.push_back(MarkerFrame{t, {}});
    } else if (t < frames.back().t) {
      throw ParseError(path.string() + ": marker rows not time-ordered");
    }
    frames.back().points[r[1]] = Vec3(
        to_double(r[2], path), to_double(r[3], path), to_double(r[4], path));
  }
  return frames;
}

void save_markers(const fs::path& path,
                  const std::vector<MarkerFrame>& frames) {
  std::string out = "t,label,x,y,z\n";
  for (const auto& f : frames) {
    for (const auto& [label, p] : f.points) {
      out += format_double(f.t) + "," + label + "," + format_double(p.x()) +
             "," + format_double(p.y()) + "," + format_double(p.z()) + "\n";
    }
  }
  atomic_write(path, out);
}

RigidTemplate load_template(const fs::path& path) {
  const auto rows = read_csv(path, "label,x,y,z");
  std::map<std::string, Vec3> pts;
  for (const auto& r : rows) {
    if (r.size() != 4) throw ParseError(path.string() + ": bad template row");
    pts[r[0]] = Vec3(to_double(r[1], path), to_double(r[2], path),
                     to_double(r[3], path));
  }
  return RigidTemplate::validated(std::move(pts));
}

void save_template(const fs::path& path, const RigidTemplate& tmpl) {
  std::string out = "label,x,y,z\n";
  for (const auto& [label, p] : tmpl.ref_points) {
    out += label + "," + format_double(p.x()) + "," + format_double(p.y()) +
           "," + format_double(p.z()) + "\n";
  }
  atomic_write(path, out);
}

DemoTrajectory load_demo(const fs::path& path) {
  const auto rows = read_csv(path, "t,px,py,pz,rx,ry,rz,d");
  DemoTrajectory demo;
  const auto n = static_cast<Eigen::Index>(rows.size());
  demo.times.resize(n);
  demo.aperture.resize(n);
  demo.poses.resize(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    if (r.size() != 8) throw ParseError(path.string() + ": bad demo row");
    demo.times(i) = to_double(r[0], path);
    Vec3 pos(to_double(r[1], path), to_double(r[2], path),
             to_double(r[3], path));
    RotVec rv(to_double(r[4], path), to_double(r[5], path),
              to_double(r[6], path));
    demo.poses[static_cast<size_t>(i)] = Pose{so3_exp(rv), pos};
    demo.aperture(i) = to_double(r[7], path);
  }
  check_strictly_increasing(demo.times, "demo csv");
  return demo;
}

void save_demo(const fs::path& path, const DemoTrajectory& demo) {
  std::string out = "t,px,py,pz,rx,ry,rz,d\n";
  RotVec prev = RotVec::Zero();
  for (Eigen::Index i = 0; i < demo.size(); ++i) {
    const Pose& p = demo.poses[static_cast<size_t>(i)];
    const RotVec r = i == 0 ? so3_log(p.rot) : so3_log_continuous(p.rot, prev);
    prev = r;
    out += format_double(demo.times(i)) + "," + format_double(p.pos.x()) +
           "," + format_double(p.pos.y()) + "," + format_double(p.pos.z()) +
           "," + format_double(r.x()) + "," + format_double(r.y()) + "," +
           format_double(r.z()) + "," + format_double(demo.aperture(i)) +
           "\n";
  }
  atomic_write(path, out);
}

JointTrajectory load_joint_trajectory(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header.front() != "t" ||
      header[header.size() - 2] != "err_lin" || header.back() != "err_ang") {
    throw ParseError(path.string() + ": expected t,q1..qD,err_lin,err_ang");
  }
  const auto dof = static_cast<Eigen::Index>(header.size()) - 3;

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(split_csv_line(line));
  }
  JointTrajectory traj;
  const auto n = static_cast<Eigen::Index>(rows.size());
  traj.times.resize(n);
  traj.states.resize(n, dof);
  traj.tracking_err.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != dof + 3) {
      throw ParseError(path.string() + ": bad trajectory row");
    }
    traj.times(i) = to_double(r[0], path);
    for (Eigen::Index jn = 0; jn < dof; ++jn) {
      traj.states(i, jn) = to_double(r[static_cast<size_t>(jn) + 1], path);
    }
    traj.tracking_err(i, 0) = to_double(r[r.size() - 2], path);
    traj.tracking_err(i, 1) = to_double(r[r.size() - 1], path);
  }
  check_strictly_increasing(traj.times, "joint trajectory csv");
  return traj;
}

void save_joint_trajectory(const fs::path& path, const JointTrajectory& traj) {
  std::string out = "t";
  for (Eigen::Index jn = 0; jn < traj.states.cols(); ++jn) {
    out += ",q" + std::to_string(jn + 1);
  }
  out += ",err_lin,err_ang\n";
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    out += format_double(traj.times(i));
    for (Eigen::Index jn = 0; jn < traj.states.cols(); ++jn) {
      out += "," + format_double(traj.states(i, jn));
    }
    out += "," + format_double(traj.tracking_err(i, 0)) + "," +
           format_double(traj.tracking_err(i, 1)) + "\n";
  }
  atomic_write(path, out);
}

WrenchSeries load_wrench(const fs::path& path) {
  const auto rows = read_csv(path, "t,fx,fy,fz,tx,ty,tz,frame");
  WrenchSeries w;
  const auto n = static_cast<Eigen::Index>(rows.size());
  w.times.resize(n);
  w.force.resize(n, 3);
  w.torque.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    if (r.size() != 8) throw ParseError(path.string() + ": bad wrench row");
    w.times(i) = to_double(r[0], path);
    for (int a = 0; a < 3; ++a) {
      w.force(i, a) = to_double(r[static_cast<size_t>(a) + 1], path);
      w.torque(i, a) = to_double(r[static_cast<size_t>(a) + 4], path);
    }
    if (i == 0) {
      w.frame = r[7];
    } else if (w.frame != r[7]) {
      throw ParseError(path.string() + ": mixed frames in one series");
    }
  }
  if (w.frame.empty()) throw ParseError(path.string() + ": missing frame");
  check_strictly_increasing(w.times, "wrench csv");
  return w;
}

void save_wrench(const fs::path& path, const WrenchSeries& series) {
  std::string out = "t,fx,fy,fz,tx,ty,tz,frame\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out += format_double(series.times(i));
    for (int a = 0; a < 3; ++a) out += "," + format_double(series.force(i, a));
    for (int a = 0; a < 3; ++a) out += "," + format_double(series.torque(i, a));
    out += "," + series.frame + "\n";
  }
  atomic_write(path, out);
}

void save_mixture(const fs::path& path, const GaussianMixture& mixture) {
  json j;
  j["k"] = mixture.components();
  j["dim"] = mixture.dim();
  j["weights"] = std::vector<double>(
      mixture.weights.data(), mixture.weights.data() + mixture.weights.size());
  json comps = json::array();
  for (int c = 0; c < mixture.components(); ++c) {
    json comp;
    comp["mean"] = std::vector<double>(
        mixture.means.row(c).data(),
        mixture.means.row(c).data() + mixture.dim());
    json cov = json::array();
    for (int r = 0; r < mixture.dim(); ++r) {
      const auto& m = mixture.covariances[static_cast<size_t>(c)];
      cov.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    comp["cov"] = cov;
    comps.push_back(comp);
  }
  j["components"] = comps;
  atomic_write(path, j.dump(2) + "\n");
}

GaussianMixture load_mixture(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    const int k = j.at("k").get<int>();
    const int dim = j.at("dim").get<int>();
    GaussianMixture m;
    m.weights.resize(k);
    m.means.resize(k, dim);
    m.covariances.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
      m.weights(c) = j.at("weights")[static_cast<size_t>(c)].get<double>();
      const auto& comp = j.at("components")[static_cast<size_t>(c)];
      for (int a = 0; a < dim; ++a) {
        m.means(c, a) = comp.at("mean")[static_cast<size_t>(a)].get<double>();
      }
      MatX cov(dim, dim);
      for (int r = 0; r < dim; ++r) {
        for (int col = 0; col < dim; ++col) {
          cov(r, col) = comp.at("cov")[static_cast<size_t>(r)]
                            [static_cast<size_t>(col)]
                                .get<double>();
        }
      }
      m.covariances[static_cast<size_t>(c)] = cov;
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

VecX load_delta_q(const fs::path& path, int dof) {
  std::istringstream in(read_file(path));
  std::vector<double> vals;
  double v = 0.0;
  while (in >> v) vals.push_back(v);
  if (static_cast<int>(vals.size()) != dof) {
    throw ParseError(path.string() + ": expected " + std::to_string(dof) +
                     " joint offsets, got " + std::to_string(vals.size()));
  }
  return Eigen::Map<VecX>(vals.data(), dof);
}

void save_score_field(const fs::path& path, const std::vector<Scenario>& all) {
  std::string out = "x,y,score,status\n";
  for (const auto& sc : all) {
    out += format_double(sc.x) + "," + format_double(sc.y) + "," +
           format_double(sc.score) + "," +
           (sc.status == ScenarioStatus::ok ? "ok" : "diverged") + "\n";
  }
  atomic_write(path, out);
}

namespace {

std::string color_ramp(double v) {
  // 0..1 mapped through a simple blue -> green -> yellow ramp.
  const auto lerp = [](double a, double b, double w) {
    return a + (b - a) * w;
  };
  double r, g, b;
  if (v < 0.5) {
    const double w = v / 0.5;
    r = lerp(40, 40, w);
    g = lerp(60, 180, w);
    b = lerp(150, 90, w);
  } else {
    const double w = (v - 0.5) / 0.5;
    r = lerp(40, 250, w);
    g = lerp(180, 220, w);
    b = lerp(90, 40, w);
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r),
                static_cast<int>(g), static_cast<int>(b));
  return buf;
}

}  // namespace

void save_score_svg(const fs::path& path, const GridSpec& grid,
                    const std::vector<Scenario>& all) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& sc : all) {
    if (sc.status != ScenarioStatus::ok) continue;
    if (!any) {
      lo = hi = sc.score;
      any = true;
    }
    lo = std::min(lo, sc.score);
    hi = std::max(hi, sc.score);
  }
  const double cell = 32.0;
  const double w = cell * grid.nx;
  const double h = cell * grid.ny;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n";
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      const auto& sc = all[static_cast<size_t>(ix * grid.ny + iy)];
      std::string fill = "#b0b0b0";  // diverged
      if (sc.status == ScenarioStatus::ok && any) {
        const double v = hi > lo ? (sc.score - lo) / (hi - lo) : 1.0;
        fill = color_ramp(v);
      }
      // y axis points up in world coordinates.
      svg << "  <rect x=\"" << cell * ix << "\" y=\""
          << h - cell * (iy + 1) << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"" << fill << "\"><title>x="
          << format_double(sc.x) << " y=" << format_double(sc.y)
          << " score=" << format_double(sc.score) << "</title></rect>\n";
    }
  }
  svg << "</svg>\n";
  atomic_write(path, svg.str());
}

}  // namespace demoreplay::io
