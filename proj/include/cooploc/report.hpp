#pragma once

// Run artifacts: the versioned per-step states CSV, the run summary computed
// from it, and columnar plot-data export. Numbers are written as 17
// significant digits in scientific notation so parsing them back reproduces
// the exact doubles; every statistic in summary.csv is computed from the
// states CSV alone, making reports reproducible from the data file.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cooploc/simcore.hpp"
#include "cooploc/types.hpp"

namespace cooploc {

namespace detail {

inline std::string fmt16(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline double parse_double(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) {
    throw std::runtime_error("states csv line " + std::to_string(line_no) +
                             ": expected a number, got '" + s + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline constexpr const char* kStatesCsvVersion = "cooploc-states-v1";
inline constexpr const char* kSummaryCsvVersion = "cooploc-summary-v1";
inline constexpr const char* kStatesCsvHeader =
    "t,vehicle,truth_x,truth_y,truth_z,est_x,est_y,est_z,err_x,err_y,err_z,"
    "lambda_x,lambda_y,lambda_z,rot_angle,innovation,active_mask,min_eig_p,observable";

struct StatesRow {
  double t = 0.0;
  AgentId vehicle = 0;
  Vec3 truth = Vec3::Zero();
  Vec3 est = Vec3::Zero();
  Vec3 err = Vec3::Zero();
  Vec3 lambda = Vec3::Zero();
  double rot_angle = 0.0;
  double innovation = 0.0;
  std::uint32_t active_mask = 0;
  double min_eig_p = 0.0;
  bool observable = false;
};

struct StatesFile {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string comm;
  double error_threshold = 0.0;
  std::vector<std::pair<AgentId, Vec3>> landmarks;  // initial inertial positions
  std::vector<StatesRow> rows;
};

inline void write_states_csv(const RunResult& run, std::ostream& out) {
  using detail::fmt16;
  const ScenarioConfig& cfg = run.config;
  out << "# " << kStatesCsvVersion << "\n";
  out << "# scenario: " << cfg.name << "\n";
  out << "# seed: " << cfg.noise.seed << "\n";
  out << "# dt: " << fmt16(cfg.dt) << "\n";
  out << "# comm: " << (cfg.comm == CommMode::Topological ? "topological" : "delayed") << "\n";
  out << "# error_threshold: " << fmt16(cfg.error_threshold) << "\n";
  for (int i = 0; i < run.graph.n_landmarks; ++i) {
    const auto& a = cfg.agents[static_cast<std::size_t>(i)];
    const Vec3 p = inertial_position_at(a.trajectory, 0.0);
    out << "# landmark: " << a.id << " " << fmt16(p.x()) << " " << fmt16(p.y()) << " "
        << fmt16(p.z()) << "\n";
  }
  out << kStatesCsvHeader << "\n";
  for (const auto& step : run.steps) {
    for (const auto& v : step.vehicles) {
      out << fmt16(step.t) << "," << v.id;
      const auto put3 = [&](const Vec3& x) {
        out << "," << fmt16(x.x()) << "," << fmt16(x.y()) << "," << fmt16(x.z());
      };
      put3(v.truth_inertial);
      put3(v.est_inertial);
      put3(v.err_inertial);
      put3(v.lambda);
      out << "," << fmt16(v.rotation_angle) << "," << fmt16(v.innovation) << "," << v.active_mask
          << "," << fmt16(v.min_eig_P) << "," << (v.observable ? 1 : 0) << "\n";
    }
  }
}

inline void write_states_csv(const RunResult& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_states_csv(run, out);
}

inline StatesFile read_states_csv(std::istream& in) {
  StatesFile sf;
  std::string line;
  int line_no = 0;
  bool saw_version = false;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(1);
      const auto strip = [](std::string s) {
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
      };
      const std::string stripped = strip(body);
      if (line_no == 1) {
        if (stripped != kStatesCsvVersion) {
          throw std::runtime_error("states csv: unsupported version line '" + stripped + "'");
        }
        saw_version = true;
        continue;
      }
      const auto colon = stripped.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = strip(stripped.substr(0, colon));
      const std::string value = strip(stripped.substr(colon + 1));
      if (key == "scenario") {
        sf.scenario = value;
      } else if (key == "seed") {
        sf.seed = std::stoull(value);
      } else if (key == "dt") {
        sf.dt = detail::parse_double(value, line_no);
      } else if (key == "comm") {
        sf.comm = value;
      } else if (key == "error_threshold") {
        sf.error_threshold = detail::parse_double(value, line_no);
      } else if (key == "landmark") {
        std::istringstream ls(value);
        AgentId id = 0;
        double x = 0, y = 0, z = 0;
        if (!(ls >> id >> x >> y >> z)) {
          throw std::runtime_error("states csv line " + std::to_string(line_no) +
                                   ": malformed landmark row");
        }
        sf.landmarks.emplace_back(id, Vec3(x, y, z));
      }
      continue;
    }
    if (!saw_version) throw std::runtime_error("states csv: missing version line");
    if (!saw_header) {
      if (line != kStatesCsvHeader) {
        throw std::runtime_error("states csv line " + std::to_string(line_no) +
                                 ": unexpected column header");
      }
      saw_header = true;
      continue;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 19) {
      throw std::runtime_error("states csv line " + std::to_string(line_no) + ": expected 19 columns, got " +
                               std::to_string(cells.size()));
    }
    StatesRow r;
    int c = 0;
    const auto num = [&]() { return detail::parse_double(cells[static_cast<std::size_t>(c++)], line_no); };
    r.t = num();
    r.vehicle = static_cast<AgentId>(std::lround(num()));
    const auto get3 = [&]() {
      Vec3 v;
      v.x() = num();
      v.y() = num();
      v.z() = num();
      return v;
    };
    r.truth = get3();
    r.est = get3();
    r.err = get3();
    r.lambda = get3();
    r.rot_angle = num();
    r.innovation = num();
    r.active_mask = static_cast<std::uint32_t>(std::lround(num()));
    r.min_eig_p = num();
    r.observable = std::lround(num()) != 0;
    sf.rows.push_back(r);
  }
  if (!saw_header) throw std::runtime_error("states csv: no data header found");
  return sf;
}

inline StatesFile read_states_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_states_csv(in);
}

struct VehicleSummary {
  AgentId id = 0;
  double final_pos_err = 0.0;
  double final_rot_err = 0.0;
  double time_to_threshold = -1.0;  // first t with |err| below threshold; -1 if never
  double exp_fit_b = 0.0;           // decay rate of a·e^{-bt} fitted to the error norm
  double exp_fit_r2 = 0.0;
  double steady_rms_pos = 0.0;  // over the last fifth of the run
  double steady_rms_rot = 0.0;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double duration = 0.0;
  int steps = 0;
  double threshold = 0.0;
  double wall_seconds = 0.0;  // informational; not derived from the CSV
  std::vector<VehicleSummary> vehicles;
};

// Summary statistics from the states data alone. The fitted error norm is
// |(2λ, p̃̄)|, combining the rotation and inertial-position errors the file
// carries; the fit is a least-squares line through its log over [0, the
// threshold-crossing time] (whole run if the threshold is never met).
inline RunSummary summarize_states(const StatesFile& sf, double wall_seconds = 0.0) {
  RunSummary s;
  s.scenario = sf.scenario;
  s.seed = sf.seed;
  s.dt = sf.dt;
  s.threshold = sf.error_threshold;
  s.wall_seconds = wall_seconds;

  std::vector<AgentId> ids;
  for (const auto& r : sf.rows) {
    bool known = false;
    for (AgentId id : ids) known = known || (id == r.vehicle);
    if (!known) ids.push_back(r.vehicle);
  }
  std::sort(ids.begin(), ids.end());

  for (const auto& r : sf.rows) s.duration = std::max(s.duration, r.t);

  for (AgentId id : ids) {
    std::vector<double> t, pos, rot, norm;
    for (const auto& r : sf.rows) {
      if (r.vehicle != id) continue;
      t.push_back(r.t);
      pos.push_back(r.err.norm());
      rot.push_back(r.rot_angle);
      norm.push_back(std::sqrt(4.0 * r.lambda.squaredNorm() + r.err.squaredNorm()));
    }
    if (t.empty()) continue;
    s.steps = std::max(s.steps, static_cast<int>(t.size()) - 1);

    VehicleSummary v;
    v.id = id;
    v.final_pos_err = pos.back();
    v.final_rot_err = rot.back();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (pos[i] < sf.error_threshold) {
        v.time_to_threshold = t[i];
        break;
      }
    }

    const double t_fit_end = (v.time_to_threshold >= 0.0) ? v.time_to_threshold : t.back();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] > t_fit_end || norm[i] <= 0.0) continue;
      const double y = std::log(norm[i]);
      sx += t[i];
      sy += y;
      sxx += t[i] * t[i];
      sxy += t[i] * y;
      ++n;
    }
    if (n >= 2 && (n * sxx - sx * sx) > 0.0) {
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double intercept = (sy - slope * sx) / n;
      v.exp_fit_b = -slope;
      double ss_res = 0, ss_tot = 0;
      const double mean_y = sy / n;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > t_fit_end || norm[i] <= 0.0) continue;
        const double y = std::log(norm[i]);
        const double y_hat = intercept + slope * t[i];
        ss_res += (y - y_hat) * (y - y_hat);
        ss_tot += (y - mean_y) * (y - mean_y);
      }
      v.exp_fit_r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 0.0;
    }

    const std::size_t tail_start = t.size() - std::max<std::size_t>(1, t.size() / 5);
    double sum_p2 = 0, sum_r2 = 0;
    std::size_t m = 0;
    for (std::size_t i = tail_start; i < t.size(); ++i) {
      sum_p2 += pos[i] * pos[i];
      sum_r2 += rot[i] * rot[i];
      ++m;
    }
    v.steady_rms_pos = std::sqrt(sum_p2 / static_cast<double>(m));
    v.steady_rms_rot = std::sqrt(sum_r2 / static_cast<double>(m));
    s.vehicles.push_back(v);
  }
  return s;
}

inline constexpr const char* kSummaryCsvHeader =
    "vehicle,final_pos_err,final_rot_err,time_to_threshold,exp_fit_b,exp_fit_r2,"
    "steady_rms_pos,steady_rms_rot";

inline void write_summary_csv(const RunSummary& s, std::ostream& out) {
  using detail::fmt16;
  out << "# " << kSummaryCsvVersion << "\n";
  out << "# scenario: " << s.scenario << "\n";
  out << "# seed: " << s.seed << "\n";
  out << "# dt: " << fmt16(s.dt) << "\n";
  out << "# duration: " << fmt16(s.duration) << "\n";
  out << "# steps: " << s.steps << "\n";
  out << "# threshold: " << fmt16(s.threshold) << "\n";
  out << "# wall_seconds: " << fmt16(s.wall_seconds) << "\n";
  out << kSummaryCsvHeader << "\n";
  for (const auto& v : s.vehicles) {
    out << v.id << "," << fmt16(v.final_pos_err) << "," << fmt16(v.final_rot_err) << ","
        << fmt16(v.time_to_threshold) << "," << fmt16(v.exp_fit_b) << "," << fmt16(v.exp_fit_r2)
        << "," << fmt16(v.steady_rms_pos) << "," << fmt16(v.steady_rms_rot) << "\n";
  }
}

inline void write_summary_csv(const RunSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_summary_csv(s, out);
}

// Data rows of a summary.csv (preamble comments are skipped).
inline std::vector<VehicleSummary> read_summary_csv(std::istream& in) {
  std::vector<VehicleSummary> out;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kSummaryCsvHeader) {
        throw std::runtime_error("summary csv line " + std::to_string(line_no) +
                                 ": unexpected column header");
      }
      saw_header = true;
      continue;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 8) {
      throw std::runtime_error("summary csv line " + std::to_string(line_no) +
                               ": expected 8 columns");
    }
    VehicleSummary v;
    int c = 0;
    const auto num = [&]() { return detail::parse_double(cells[static_cast<std::size_t>(c++)], line_no); };
    v.id = static_cast<AgentId>(std::lround(num()));
    v.final_pos_err = num();
    v.final_rot_err = num();
    v.time_to_threshold = num();
    v.exp_fit_b = num();
    v.exp_fit_r2 = num();
    v.steady_rms_pos = num();
    v.steady_rms_rot = num();
    out.push_back(v);
  }
  if (!saw_header) throw std::runtime_error("summary csv: no data header found");
  return out;
}

// Columnar plot files: per-vehicle error series and truth-vs-estimate
// trajectories, plus the landmark positions, space-separated with a comment
// header. Vehicles are numbered f1, f2, ... in ascending id order.
inline void export_plotdata(const StatesFile& sf, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  using detail::fmt16;

  std::vector<AgentId> ids;
  for (const auto& r : sf.rows) {
    bool known = false;
    for (AgentId id : ids) known = known || (id == r.vehicle);
    if (!known) ids.push_back(r.vehicle);
  }
  std::sort(ids.begin(), ids.end());

  for (std::size_t vi = 0; vi < ids.size(); ++vi) {
    const AgentId id = ids[vi];
    const std::string stem = "f" + std::to_string(vi + 1);
    std::ofstream err_out(fs::path(out_dir) / (stem + "_errors.dat"));
    std::ofstream traj_out(fs::path(out_dir) / (stem + "_trajectory.dat"));
    if (!err_out || !traj_out) throw std::runtime_error("cannot write plot data in " + out_dir);
    err_out << "# t err_x err_y err_z err_norm rot_angle\n";
    traj_out << "# t truth_x truth_y truth_z est_x est_y est_z\n";
    for (const auto& r : sf.rows) {
      if (r.vehicle != id) continue;
      err_out << fmt16(r.t) << " " << fmt16(r.err.x()) << " " << fmt16(r.err.y()) << " "
              << fmt16(r.err.z()) << " " << fmt16(r.err.norm()) << " " << fmt16(r.rot_angle)
              << "\n";
      traj_out << fmt16(r.t) << " " << fmt16(r.truth.x()) << " " << fmt16(r.truth.y()) << " "
               << fmt16(r.truth.z()) << " " << fmt16(r.est.x()) << " " << fmt16(r.est.y()) << " "
               << fmt16(r.est.z()) << "\n";
    }
  }

  std::ofstream lm_out(std::filesystem::path(out_dir) / "landmarks.dat");
  if (!lm_out) throw std::runtime_error("cannot write plot data in " + out_dir);
  lm_out << "# id x y z\n";
  for (const auto& [id, p] : sf.landmarks) {
    lm_out << id << " " << fmt16(p.x()) << " " << fmt16(p.y()) << " " << fmt16(p.z()) << "\n";
  }
}

}  // namespace cooploc
