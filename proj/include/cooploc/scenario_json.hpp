#pragma once

// Scenario file format: JSON with strict key checking. Unknown or mistyped
// keys fail loudly with the JSON-pointer-style path of the offending element,
// so typos in config files cannot silently fall back to defaults. Custom
// (programmatic) trajectories have no file representation.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cooploc/scenario.hpp"

namespace cooploc {

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message) {}
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || (item.key() == a);
    if (!ok) throw ScenarioParseError(path, "unknown key '" + item.key() + "'");
  }
}

inline const json& require(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ScenarioParseError(path, std::string("missing required key '") + key + "'");
  return *it;
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioParseError(path, "expected a number");
  return j.get<double>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ScenarioParseError(path, "expected a boolean");
  return j.get<bool>();
}

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ScenarioParseError(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioParseError(path, "expected a string");
  return j.get<std::string>();
}

inline Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ScenarioParseError(path, "expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = as_double(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  return v;
}

inline Vec6 as_vec6(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 6) throw ScenarioParseError(path, "expected an array of 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v(i) = as_double(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  return v;
}

inline UnitQuaternion as_quaternion(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) {
    throw ScenarioParseError(path, "expected an array of 4 numbers [w, x, y, z]");
  }
  const double w = as_double(j[0], path + "/0");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = as_double(j[static_cast<std::size_t>(i + 1)], path + "/" + std::to_string(i + 1));
  try {
    return UnitQuaternion::from_components(w, v);
  } catch (const std::invalid_argument& ex) {
    throw ScenarioParseError(path, ex.what());
  }
}

inline GainConfig parse_gains(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioParseError(path, "expected an object");
  check_keys(j, path, {"k", "q", "v_diag", "p0_diag"});
  GainConfig g;
  if (j.contains("k")) g.k = as_double(j["k"], path + "/k");
  if (j.contains("q")) g.q = as_double(j["q"], path + "/q");
  if (j.contains("v_diag")) g.v_diag = as_vec6(j["v_diag"], path + "/v_diag");
  if (j.contains("p0_diag")) g.p0_diag = as_vec6(j["p0_diag"], path + "/p0_diag");
  return g;
}

inline Trajectory parse_trajectory(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioParseError(path, "expected an object");
  const std::string type = as_string(require(j, path, "type"), path + "/type");
  if (type == "static") {
    check_keys(j, path, {"type", "position", "yaw"});
    StaticTrajectory t;
    t.position = as_vec3(require(j, path, "position"), path + "/position");
    if (j.contains("yaw")) t.yaw = as_double(j["yaw"], path + "/yaw");
    return t;
  }
  if (type == "linear") {
    check_keys(j, path, {"type", "start", "velocity"});
    LinearTrajectory t;
    t.start = as_vec3(require(j, path, "start"), path + "/start");
    t.velocity = as_vec3(require(j, path, "velocity"), path + "/velocity");
    return t;
  }
  if (type == "waypoints") {
    check_keys(j, path, {"type", "points"});
    const json& pts = require(j, path, "points");
    if (!pts.is_array() || pts.size() < 2) {
      throw ScenarioParseError(path + "/points", "expected an array of at least 2 waypoints");
    }
    WaypointTrajectory t;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string p_path = path + "/points/" + std::to_string(i);
      const json& pj = pts[i];
      if (!pj.is_object()) throw ScenarioParseError(p_path, "expected an object");
      check_keys(pj, p_path, {"t", "position"});
      Waypoint w;
      w.t = as_double(require(pj, p_path, "t"), p_path + "/t");
      w.position = as_vec3(require(pj, p_path, "position"), p_path + "/position");
      t.points.push_back(w);
    }
    return t;
  }
  throw ScenarioParseError(path + "/type",
                           "unknown trajectory type '" + type +
                               "' (known: static, linear, waypoints)");
}

inline AgentConfig parse_agent(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioParseError(path, "expected an object");
  check_keys(j, path,
             {"id", "kind", "trajectory", "neighbors", "radius", "initial_position_estimate",
              "initial_attitude_estimate", "gains"});
  AgentConfig a;
  a.id = static_cast<AgentId>(as_int(require(j, path, "id"), path + "/id"));
  const std::string kind = as_string(require(j, path, "kind"), path + "/kind");
  if (kind == "landmark") {
    a.kind = AgentKind::Landmark;
  } else if (kind == "vehicle") {
    a.kind = AgentKind::Vehicle;
  } else {
    throw ScenarioParseError(path + "/kind",
                             "unknown agent kind '" + kind + "' (known: landmark, vehicle)");
  }
  a.trajectory = parse_trajectory(require(j, path, "trajectory"), path + "/trajectory");
  if (j.contains("neighbors")) {
    const json& nb = j["neighbors"];
    const std::string nb_path = path + "/neighbors";
    if (!nb.is_array()) throw ScenarioParseError(nb_path, "expected an array of agent ids");
    for (std::size_t i = 0; i < nb.size(); ++i) {
      a.neighbors.push_back(
          static_cast<AgentId>(as_int(nb[i], nb_path + "/" + std::to_string(i))));
    }
  }
  if (j.contains("radius")) a.radius = as_double(j["radius"], path + "/radius");
  if (j.contains("initial_position_estimate")) {
    a.initial_position_estimate =
        as_vec3(j["initial_position_estimate"], path + "/initial_position_estimate");
  }
  if (j.contains("initial_attitude_estimate")) {
    a.initial_attitude_estimate =
        as_quaternion(j["initial_attitude_estimate"], path + "/initial_attitude_estimate");
  }
  if (j.contains("gains")) a.gains = parse_gains(j["gains"], path + "/gains");
  return a;
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using detail::as_bool;
  using detail::as_double;
  using detail::as_int;
  using detail::as_string;
  using detail::check_keys;
  using detail::require;

  if (!j.is_object()) throw ScenarioParseError("/", "expected a JSON object");
  check_keys(j, "/",
             {"name", "dt", "duration", "comm", "error_threshold", "noise", "camera",
              "default_gains", "features", "observability", "agents", "occlusion_windows"});

  ScenarioConfig cfg;
  if (j.contains("name")) cfg.name = as_string(j["name"], "/name");
  if (j.contains("dt")) cfg.dt = as_double(j["dt"], "/dt");
  if (j.contains("duration")) cfg.duration = as_double(j["duration"], "/duration");
  if (j.contains("error_threshold")) {
    cfg.error_threshold = as_double(j["error_threshold"], "/error_threshold");
  }
  if (j.contains("comm")) {
    const std::string comm = as_string(j["comm"], "/comm");
    if (comm == "topological") {
      cfg.comm = CommMode::Topological;
    } else if (comm == "delayed") {
      cfg.comm = CommMode::Delayed;
    } else {
      throw ScenarioParseError("/comm", "unknown comm mode '" + comm +
                                            "' (known: topological, delayed)");
    }
  }
  if (j.contains("noise")) {
    const nlohmann::json& nj = j["noise"];
    if (!nj.is_object()) throw ScenarioParseError("/noise", "expected an object");
    check_keys(nj, "/noise", {"sigma_v", "sigma_omega", "bearing_bound", "seed"});
    if (nj.contains("sigma_v")) cfg.noise.sigma_v = as_double(nj["sigma_v"], "/noise/sigma_v");
    if (nj.contains("sigma_omega")) {
      cfg.noise.sigma_omega = as_double(nj["sigma_omega"], "/noise/sigma_omega");
    }
    if (nj.contains("bearing_bound")) {
      cfg.noise.bearing_bound = as_double(nj["bearing_bound"], "/noise/bearing_bound");
    }
    if (nj.contains("seed")) {
      cfg.noise.seed = static_cast<std::uint64_t>(as_int(nj["seed"], "/noise/seed"));
    }
  }
  if (j.contains("camera")) {
    const nlohmann::json& cj = j["camera"];
    if (!cj.is_object()) throw ScenarioParseError("/camera", "expected an object");
    check_keys(cj, "/camera", {"half_angle_h", "half_angle_v", "max_range", "boresight"});
    if (cj.contains("half_angle_h")) {
      cfg.camera.half_angle_h = as_double(cj["half_angle_h"], "/camera/half_angle_h");
    }
    if (cj.contains("half_angle_v")) {
      cfg.camera.half_angle_v = as_double(cj["half_angle_v"], "/camera/half_angle_v");
    }
    if (cj.contains("max_range")) {
      cfg.camera.max_range = as_double(cj["max_range"], "/camera/max_range");
    }
    if (cj.contains("boresight")) {
      cfg.camera.boresight = detail::as_vec3(cj["boresight"], "/camera/boresight");
    }
  }
  if (j.contains("default_gains")) {
    cfg.default_gains = detail::parse_gains(j["default_gains"], "/default_gains");
  }
  if (j.contains("features")) {
    const nlohmann::json& fj = j["features"];
    if (!fj.is_object()) throw ScenarioParseError("/features", "expected an object");
    check_keys(fj, "/features", {"visibility", "noise", "observability_log"});
    if (fj.contains("visibility")) {
      cfg.features.visibility = as_bool(fj["visibility"], "/features/visibility");
    }
    if (fj.contains("noise")) cfg.features.noise = as_bool(fj["noise"], "/features/noise");
    if (fj.contains("observability_log")) {
      cfg.features.observability_log = as_bool(fj["observability_log"], "/features/observability_log");
    }
  }
  if (j.contains("observability")) {
    const nlohmann::json& oj = j["observability"];
    if (!oj.is_object()) throw ScenarioParseError("/observability", "expected an object");
    check_keys(oj, "/observability", {"window", "threshold"});
    if (oj.contains("window")) {
      cfg.observability.window = as_double(oj["window"], "/observability/window");
    }
    if (oj.contains("threshold")) {
      cfg.observability.threshold = as_double(oj["threshold"], "/observability/threshold");
    }
  }

  const nlohmann::json& agents = require(j, "/", "agents");
  if (!agents.is_array()) throw ScenarioParseError("/agents", "expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    cfg.agents.push_back(detail::parse_agent(agents[i], "/agents/" + std::to_string(i)));
  }

  if (j.contains("occlusion_windows")) {
    const nlohmann::json& ows = j["occlusion_windows"];
    if (!ows.is_array()) throw ScenarioParseError("/occlusion_windows", "expected an array");
    for (std::size_t i = 0; i < ows.size(); ++i) {
      const std::string path = "/occlusion_windows/" + std::to_string(i);
      const nlohmann::json& wj = ows[i];
      if (!wj.is_object()) throw ScenarioParseError(path, "expected an object");
      check_keys(wj, path, {"vehicle", "target", "start", "end"});
      OcclusionWindow w;
      w.vehicle = static_cast<AgentId>(as_int(require(wj, path, "vehicle"), path + "/vehicle"));
      w.target = static_cast<AgentId>(as_int(require(wj, path, "target"), path + "/target"));
      w.start = as_double(require(wj, path, "start"), path + "/start");
      w.end = as_double(require(wj, path, "end"), path + "/end");
      cfg.occlusion_windows.push_back(w);
    }
  }
  return cfg;
}

namespace detail {

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json vec6_to_json(const Vec6& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v(i));
  return a;
}

inline json gains_to_json(const GainConfig& g) {
  json j;
  j["k"] = g.k;
  j["q"] = g.q;
  j["v_diag"] = vec6_to_json(g.v_diag);
  j["p0_diag"] = vec6_to_json(g.p0_diag);
  return j;
}

inline json trajectory_to_json(const Trajectory& traj) {
  json j;
  if (const auto* st = std::get_if<StaticTrajectory>(&traj)) {
    j["type"] = "static";
    j["position"] = vec3_to_json(st->position);
    j["yaw"] = st->yaw;
  } else if (const auto* lin = std::get_if<LinearTrajectory>(&traj)) {
    j["type"] = "linear";
    j["start"] = vec3_to_json(lin->start);
    j["velocity"] = vec3_to_json(lin->velocity);
  } else if (const auto* wp = std::get_if<WaypointTrajectory>(&traj)) {
    j["type"] = "waypoints";
    json pts = json::array();
    for (const auto& p : wp->points) {
      json pj;
      pj["t"] = p.t;
      pj["position"] = vec3_to_json(p.position);
      pts.push_back(pj);
    }
    j["points"] = pts;
  } else {
    throw std::invalid_argument("trajectory_to_json: custom trajectories have no file form");
  }
  return j;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
  using detail::json;
  json j;
  j["name"] = cfg.name;
  j["dt"] = cfg.dt;
  j["duration"] = cfg.duration;
  j["comm"] = (cfg.comm == CommMode::Topological) ? "topological" : "delayed";
  j["error_threshold"] = cfg.error_threshold;
  j["noise"] = {{"sigma_v", cfg.noise.sigma_v},
                {"sigma_omega", cfg.noise.sigma_omega},
                {"bearing_bound", cfg.noise.bearing_bound},
                {"seed", cfg.noise.seed}};
  j["camera"] = {{"half_angle_h", cfg.camera.half_angle_h},
                 {"half_angle_v", cfg.camera.half_angle_v},
                 {"max_range", cfg.camera.max_range},
                 {"boresight", detail::vec3_to_json(cfg.camera.boresight)}};
  j["default_gains"] = detail::gains_to_json(cfg.default_gains);
  j["features"] = {{"visibility", cfg.features.visibility},
                   {"noise", cfg.features.noise},
                   {"observability_log", cfg.features.observability_log}};
  j["observability"] = {{"window", cfg.observability.window},
                        {"threshold", cfg.observability.threshold}};
  json agents = nlohmann::json::array();
  for (const auto& a : cfg.agents) {
    json aj;
    aj["id"] = a.id;
    aj["kind"] = (a.kind == AgentKind::Landmark) ? "landmark" : "vehicle";
    aj["trajectory"] = detail::trajectory_to_json(a.trajectory);
    if (!a.neighbors.empty()) aj["neighbors"] = a.neighbors;
    if (a.radius != 0.0) aj["radius"] = a.radius;
    if (a.initial_position_estimate) {
      aj["initial_position_estimate"] = detail::vec3_to_json(*a.initial_position_estimate);
    }
    if (a.initial_attitude_estimate) {
      const auto& q = *a.initial_attitude_estimate;
      aj["initial_attitude_estimate"] = json::array({q.w, q.vec.x(), q.vec.y(), q.vec.z()});
    }
    if (a.gains) aj["gains"] = detail::gains_to_json(*a.gains);
    agents.push_back(aj);
  }
  j["agents"] = agents;
  if (!cfg.occlusion_windows.empty()) {
    json ows = nlohmann::json::array();
    for (const auto& w : cfg.occlusion_windows) {
      ows.push_back({{"vehicle", w.vehicle}, {"target", w.target}, {"start", w.start}, {"end", w.end}});
    }
    j["occlusion_windows"] = ows;
  }
  return j;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ScenarioParseError(path, ex.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario_file(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(cfg).dump(2) << "\n";
}

}  // namespace cooploc
