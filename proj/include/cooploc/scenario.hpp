#pragma once

// Scenario descriptions: the full set of knobs a simulation run needs, plus
// validation and the constructors that turn a config into runtime objects
// (interaction graph, initial truth states, initial observer states).

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cooploc/graph.hpp"
#include "cooploc/observer.hpp"
#include "cooploc/sensing.hpp"
#include "cooploc/trajectory.hpp"
#include "cooploc/types.hpp"
#include "cooploc/world.hpp"

namespace cooploc {

// Scalar gain set; q applies uniformly to every declared neighbor. Expanded
// into ObserverGains per vehicle.
struct GainConfig {
  double k = 1.0;
  double q = 10.0;
  Vec6 v_diag = Vec6::Ones();
  Vec6 p0_diag = Vec6::Ones();
};

struct AgentConfig {
  AgentId id = 0;
  AgentKind kind = AgentKind::Vehicle;
  Trajectory trajectory = StaticTrajectory{};
  std::vector<AgentId> neighbors;  // vehicles only, ordered
  double radius = 0.0;             // occlusion-sphere radius, 0 = transparent

  // Initial estimate; absent fields default to the true initial value.
  std::optional<Vec3> initial_position_estimate;           // inertial frame
  std::optional<UnitQuaternion> initial_attitude_estimate;  // wxyz
  std::optional<GainConfig> gains;                          // overrides default_gains
};

// Scripted edge removal: vehicle loses sight of target while start <= t < end.
struct OcclusionWindow {
  AgentId vehicle = 0;
  AgentId target = 0;
  double start = 0.0;
  double end = 0.0;
};

struct FeatureFlags {
  bool visibility = false;       // geometric field-of-view / occlusion gating
  bool noise = true;             // velocity + bearing noise
  bool observability_log = true; // per-step sliding-window Gramian flag
};

enum class CommMode {
  Topological,  // neighbors' estimates from this epoch, in dependency order
  Delayed,      // neighbors' estimates from the previous epoch
};

struct ObservabilityParams {
  double window = 0.5;      // s
  double threshold = 1e-6;  // on the Gramian's minimum eigenvalue
};

struct ScenarioConfig {
  std::string name;
  double dt = 1.0 / 60.0;
  double duration = 60.0;
  NoiseConfig noise;
  CameraModel camera;
  GainConfig default_gains;
  FeatureFlags features;
  CommMode comm = CommMode::Topological;
  ObservabilityParams observability;
  double error_threshold = 1.0;  // m, for the time-to-threshold statistic
  std::vector<AgentConfig> agents;  // ids 1..n in order, landmarks first
  std::vector<OcclusionWindow> occlusion_windows;
};

inline int count_landmarks(const ScenarioConfig& cfg) {
  int n = 0;
  for (const auto& a : cfg.agents) {
    if (a.kind == AgentKind::Landmark) ++n;
  }
  return n;
}

inline InteractionGraph graph_from_config(const ScenarioConfig& cfg) {
  InteractionGraph g;
  g.n_landmarks = count_landmarks(cfg);
  g.n_vehicles = static_cast<int>(cfg.agents.size()) - g.n_landmarks;
  g.neighbor_sets.resize(cfg.agents.size());
  for (const auto& a : cfg.agents) {
    if (a.id >= 1 && a.id <= static_cast<AgentId>(cfg.agents.size())) {
      g.neighbor_sets[static_cast<std::size_t>(a.id - 1)] = a.neighbors;
    }
  }
  return g;
}

inline ValidationReport validate_config(const ScenarioConfig& cfg) {
  ValidationReport report;
  if (!(cfg.dt > 0.0)) report.add("dt", "dt must be positive");
  if (!(cfg.duration >= cfg.dt)) report.add("duration", "duration must cover at least one step");
  if (cfg.noise.sigma_v < 0.0 || cfg.noise.sigma_omega < 0.0 || cfg.noise.bearing_bound < 0.0) {
    report.add("noise", "noise magnitudes must be non-negative");
  }
  try {
    cfg.camera.validate();
  } catch (const std::invalid_argument& ex) {
    report.add("camera", ex.what());
  }

  if (cfg.agents.empty()) {
    report.add("agents", "at least one agent is required");
    return report;
  }
  const int n = static_cast<int>(cfg.agents.size());
  bool ids_ok = true;
  for (int i = 0; i < n; ++i) {
    if (cfg.agents[static_cast<std::size_t>(i)].id != i + 1) {
      report.add("agent-ids", "agent ids must be 1.." + std::to_string(n) + " in order");
      ids_ok = false;
      break;
    }
  }
  const int n_l = count_landmarks(cfg);
  for (int i = 0; i < std::min(n_l, n); ++i) {
    if (cfg.agents[static_cast<std::size_t>(i)].kind != AgentKind::Landmark) {
      report.add("agent-order", "landmark agents must come before vehicle agents");
      break;
    }
  }
  const auto check_gains = [&](const GainConfig& gc, const std::string& where) {
    if (!(gc.k > 0.5)) report.add("gain-k", where + ": gain k must exceed 1/2");
    if (!(gc.q > 0.0)) report.add("gain-q", where + ": weight q must be positive");
    if ((gc.v_diag.array() <= 0.0).any()) {
      report.add("gain-v", where + ": V diagonal must be positive");
    }
    if ((gc.p0_diag.array() <= 0.0).any()) {
      report.add("gain-p0", where + ": P0 diagonal must be positive");
    }
  };
  check_gains(cfg.default_gains, "default gains");
  for (const auto& a : cfg.agents) {
    if (a.kind == AgentKind::Landmark) {
      if (!a.neighbors.empty()) {
        report.add("landmark-neighbors",
                   "landmark " + std::to_string(a.id) + " must not declare neighbors");
      }
      if (a.initial_position_estimate || a.initial_attitude_estimate || a.gains) {
        report.add("landmark-estimate",
                   "landmark " + std::to_string(a.id) + " carries no estimator settings");
      }
    }
    if (a.radius < 0.0) {
      report.add("agent-radius", "agent " + std::to_string(a.id) + " has negative radius");
    }
    if (a.gains) check_gains(*a.gains, "agent " + std::to_string(a.id));
  }

  for (const auto& w : cfg.occlusion_windows) {
    if (!(w.end > w.start)) {
      report.add("occlusion-window", "occlusion window must have end > start");
      continue;
    }
    bool edge_found = false;
    for (const auto& a : cfg.agents) {
      if (a.id != w.vehicle) continue;
      for (AgentId j : a.neighbors) edge_found = edge_found || (j == w.target);
    }
    if (!edge_found) {
      report.add("occlusion-edge", "occlusion window references edge " +
                                       std::to_string(w.vehicle) + " -> " +
                                       std::to_string(w.target) +
                                       " which is not a declared neighbor pair");
    }
  }

  if (ids_ok) {
    const auto graph_report = validate_graph(graph_from_config(cfg));
    for (const auto& v : graph_report.violations) report.add(v.code, v.message);
  }
  return report;
}

inline std::vector<AgentState> make_initial_world(const ScenarioConfig& cfg) {
  std::vector<AgentState> world;
  world.reserve(cfg.agents.size());
  for (const auto& a : cfg.agents) {
    world.push_back(initial_state(a.id, a.kind, a.trajectory));
  }
  return world;
}

inline ObserverGains expand_gains(const GainConfig& gc, const std::vector<AgentId>& neighbors) {
  ObserverGains g;
  g.k = gc.k;
  g.q.reserve(neighbors.size());
  for (AgentId j : neighbors) g.q.emplace_back(j, gc.q);
  g.V = gc.v_diag.asDiagonal();
  g.P0 = gc.p0_diag.asDiagonal();
  g.validate();
  return g;
}

// Initial observer state for one vehicle. The initial position estimate is
// given in the inertial frame and mapped into the estimated body frame,
// p̂(0) = R̂(0)ᵀ p̄̂(0); absent fields default to the true initial values.
inline ObserverState make_initial_observer(const AgentConfig& a, const AgentState& truth) {
  if (a.kind != AgentKind::Vehicle) {
    throw std::invalid_argument("make_initial_observer: agent " + std::to_string(a.id) +
                                " is not a vehicle");
  }
  ObserverState s;
  s.R_hat = a.initial_attitude_estimate ? rotation_from_quat(*a.initial_attitude_estimate)
                                        : truth.pose.R;
  const Vec3 p_bar_hat = a.initial_position_estimate ? *a.initial_position_estimate
                                                     : truth.pose.inertial_position();
  s.p_hat = s.R_hat.transposed() * p_bar_hat;
  return s;
}

}  // namespace cooploc
