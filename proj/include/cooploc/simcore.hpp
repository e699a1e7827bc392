#pragma once

// The simulation loop. Each epoch advances truth with midpoint-sampled
// velocities, senses bearings at the new truth, applies scripted occlusions,
// exchanges estimates, and steps every vehicle's observer in dependency
// order. Per-step records carry everything the reports need; an optional tap
// exposes each vehicle's exact observer inputs so tests can replay a single
// vehicle offline and verify it used nothing else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cooploc/graph.hpp"
#include "cooploc/observability.hpp"
#include "cooploc/observer.hpp"
#include "cooploc/scenario.hpp"
#include "cooploc/sensing.hpp"
#include "cooploc/trajectory.hpp"
#include "cooploc/types.hpp"
#include "cooploc/world.hpp"

namespace cooploc {

class SimulationError : public std::runtime_error {
 public:
  SimulationError(int step, double t, const std::string& message)
      : std::runtime_error("simulation step " + std::to_string(step) +
                           " (t=" + std::to_string(t) + "): " + message),
        step_(step),
        t_(t) {}
  int step() const { return step_; }
  double time() const { return t_; }

 private:
  int step_;
  double t_;
};

struct VehicleStepRecord {
  AgentId id = 0;
  Vec3 truth_inertial = Vec3::Zero();
  Vec3 est_inertial = Vec3::Zero();
  Vec3 err_inertial = Vec3::Zero();  // truth - estimate
  Vec3 lambda = Vec3::Zero();        // error-quaternion vector part
  double rotation_angle = 0.0;       // rad
  double innovation = 0.0;
  std::uint32_t active_mask = 0;  // bit b: declared neighbor b measured
  double min_eig_P = 0.0;
  bool observable = false;  // trailing-window Gramian above threshold
  double x_err_norm = 0.0;  // |(2λ, p̃)|
};

struct StepRecord {
  double t = 0.0;
  std::vector<VehicleStepRecord> vehicles;
};

// Everything one vehicle's observer consumed in one epoch.
struct StepInputs {
  int step = 0;
  double t = 0.0;  // epoch end time
  double dt = 0.0;
  AgentId vehicle = 0;
  Vec3 v_meas = Vec3::Zero();
  Vec3 omega_meas = Vec3::Zero();
  std::vector<BearingMeasurement> bearings;
  std::vector<EstimateMessage> messages;
};

using StepTap =
    std::function<void(const StepInputs&, const ObserverState& before, const ObserverState& after)>;

struct RunResult {
  ScenarioConfig config;
  InteractionGraph graph;
  std::vector<StepRecord> steps;  // one per epoch plus the initial state
  std::vector<ObserverState> final_observers;  // vehicle order
  double wall_seconds = 0.0;
};

namespace detail {

inline bool scripted_out(const std::vector<OcclusionWindow>& windows, AgentId obs, AgentId tgt,
                         double t) {
  for (const auto& w : windows) {
    if (w.vehicle == obs && w.target == tgt && t >= w.start && t < w.end) return true;
  }
  return false;
}

// Remove scripted-occlusion edges from a sensing sweep (measurements and the
// active-topology snapshot alike).
inline void apply_scripted_occlusions(SensingResult& sensed, const InteractionGraph& graph,
                                      const std::vector<OcclusionWindow>& windows, double t) {
  if (windows.empty()) return;
  std::erase_if(sensed.measurements, [&](const BearingMeasurement& m) {
    return scripted_out(windows, m.observer, m.target, t);
  });
  for (AgentId id = graph.n_landmarks + 1; id <= graph.agent_count(); ++id) {
    auto& act = sensed.snapshot.active[static_cast<std::size_t>(id - graph.n_landmarks - 1)];
    std::erase_if(act, [&](AgentId j) { return scripted_out(windows, id, j, t); });
  }
}

inline double min_pairwise_distance(const std::vector<AgentState>& world) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Vec3 a = world[i].pose.inertial_position();
    for (std::size_t j = i + 1; j < world.size(); ++j) {
      best = std::min(best, (a - world[j].pose.inertial_position()).norm());
    }
  }
  return best;
}

struct GramianSample {
  Mat6 A = Mat6::Zero();
  MatX C;
};

}  // namespace detail

inline RunResult run_scenario(const ScenarioConfig& cfg, const StepTap& tap = {}) {
  const auto t_start = std::chrono::steady_clock::now();

  const ValidationReport report = validate_config(cfg);
  if (!report.ok()) {
    throw std::invalid_argument("run_scenario: invalid scenario: " + report.joined());
  }

  RunResult out;
  out.config = cfg;
  out.graph = graph_from_config(cfg);
  const InteractionGraph& graph = out.graph;
  const int n_l = graph.n_landmarks;
  const int n_v = graph.n_vehicles;
  const std::vector<AgentId> order = topological_order(graph);

  std::vector<AgentState> world = make_initial_world(cfg);
  std::vector<double> radius_by_id;
  radius_by_id.reserve(cfg.agents.size());
  for (const auto& a : cfg.agents) radius_by_id.push_back(a.radius);

  std::vector<ObserverState> observers;
  observers.reserve(static_cast<std::size_t>(n_v));
  for (int vi = 0; vi < n_v; ++vi) {
    const AgentConfig& a = cfg.agents[static_cast<std::size_t>(n_l + vi)];
    ObserverState s = make_initial_observer(a, world[static_cast<std::size_t>(n_l + vi)]);
    s.gains = expand_gains(a.gains ? *a.gains : cfg.default_gains, a.neighbors);
    s.P = s.gains.P0;
    observers.push_back(std::move(s));
  }

  const int n_steps = static_cast<int>(std::ceil(cfg.duration / cfg.dt - 1e-9));
  const int gram_window = static_cast<int>(std::llround(cfg.observability.window / cfg.dt));
  std::vector<std::vector<detail::GramianSample>> gram_hist(static_cast<std::size_t>(n_v));
  out.steps.reserve(static_cast<std::size_t>(n_steps) + 1);

  // Shared by the initial record and every epoch's record.
  const auto record_step =
      [&](int k, double t, const TopologySnapshot& snapshot,
          const std::vector<ObserverStepInfo>& infos) {
        StepRecord rec;
        rec.t = t;
        rec.vehicles.resize(static_cast<std::size_t>(n_v));
        for (int vi = 0; vi < n_v; ++vi) {
          const AgentId id = n_l + vi + 1;
          const AgentState& truth = world[static_cast<std::size_t>(id - 1)];
          const ObserverState& obs = observers[static_cast<std::size_t>(vi)];
          VehicleStepRecord& r = rec.vehicles[static_cast<std::size_t>(vi)];
          const ErrorDiagnostics diag = diagnostics(obs, truth);
          r.id = id;
          r.truth_inertial = truth.pose.inertial_position();
          r.est_inertial = obs.R_hat * obs.p_hat;
          r.err_inertial = diag.p_err_inertial;
          r.lambda = diag.lambda;
          r.rotation_angle = diag.rotation_angle;
          r.innovation = infos[static_cast<std::size_t>(vi)].innovation_norm;
          r.min_eig_P = infos[static_cast<std::size_t>(vi)].min_eig_P;
          r.active_mask = snapshot.mask_for(graph, id);
          r.x_err_norm = diag.x_err.norm();

          // Gramian history: true error-system matrices at this instant, with
          // only the edges that actually produced measurements.
          auto& hist = gram_hist[static_cast<std::size_t>(vi)];
          detail::GramianSample sample;
          const Vec3 w_true =
              sample_trajectory(cfg.agents[static_cast<std::size_t>(id - 1)].trajectory, t).omega;
          const Mat3 neg_skew = -skew(w_true);
          sample.A.topLeftCorner<3, 3>() = neg_skew;
          sample.A.bottomRightCorner<3, 3>() = neg_skew;
          const auto& act = snapshot.active[static_cast<std::size_t>(vi)];
          std::vector<Vec3> targets;
          targets.reserve(act.size());
          for (AgentId j : act) {
            targets.push_back(world[static_cast<std::size_t>(j - 1)].pose.inertial_position());
          }
          sample.C = ideal_output_matrix(truth.pose, targets);
          hist.push_back(std::move(sample));

          if (cfg.features.observability_log && k >= gram_window && gram_window >= 1) {
            const int k0 = k - gram_window;
            const double t0 = k0 * cfg.dt;
            const auto idx_at = [&](double tau) {
              int idx = k0 + static_cast<int>(std::llround((tau - t0) / cfg.dt));
              return std::clamp(idx, k0, k);
            };
            const auto rep = observability_gramian(
                [&](double tau) { return hist[static_cast<std::size_t>(idx_at(tau))].A; },
                [&](double tau) { return hist[static_cast<std::size_t>(idx_at(tau))].C; }, t0, t,
                cfg.dt, cfg.observability.threshold);
            r.observable = rep.observable;
          }
        }
        out.steps.push_back(std::move(rec));
      };

  {
    if (detail::min_pairwise_distance(world) <= 0.1) {
      throw SimulationError(0, 0.0, "agents closer than 0.1 m apart");
    }
    TopologySnapshot empty_snapshot;
    empty_snapshot.active.resize(static_cast<std::size_t>(n_v));
    std::vector<ObserverStepInfo> infos(static_cast<std::size_t>(n_v));
    for (int vi = 0; vi < n_v; ++vi) {
      const Eigen::SelfAdjointEigenSolver<Mat6> es(observers[static_cast<std::size_t>(vi)].P,
                                                   Eigen::EigenvaluesOnly);
      infos[static_cast<std::size_t>(vi)].min_eig_P = es.eigenvalues().minCoeff();
    }
    record_step(0, 0.0, empty_snapshot, infos);
  }

  for (int k = 1; k <= n_steps; ++k) {
    const double t_new = k * cfg.dt;
    const double t_mid = (static_cast<double>(k) - 0.5) * cfg.dt;

    // 1. Truth: velocities sampled at the step midpoint, one integrator step.
    for (auto& st : world) {
      const auto vel =
          velocities_for_trajectory(cfg.agents[static_cast<std::size_t>(st.id - 1)].trajectory,
                                    t_mid);
      st.v = vel.v;
      st.omega = vel.omega;
      st = propagate(st, cfg.dt);
    }
    if (detail::min_pairwise_distance(world) <= 0.1) {
      throw SimulationError(k, t_new, "agents closer than 0.1 m apart");
    }

    // 2. Sense at the new truth, then apply scripted occlusions.
    SensingResult sensed =
        sense_all(world, graph, cfg.camera, cfg.noise, radius_by_id, cfg.features.visibility,
                  cfg.features.noise, t_new, static_cast<std::uint32_t>(k));
    detail::apply_scripted_occlusions(sensed, graph, cfg.occlusion_windows, t_new);

    // 3+4. Exchange estimates and step the observers in dependency order.
    const std::vector<ObserverState> prev_observers = observers;  // for delayed comm
    std::vector<ObserverStepInfo> infos(static_cast<std::size_t>(n_v));
    for (AgentId id : order) {
      const int vi = id - n_l - 1;
      const AgentConfig& acfg = cfg.agents[static_cast<std::size_t>(id - 1)];

      Vec3 v_meas = world[static_cast<std::size_t>(id - 1)].v;
      Vec3 omega_meas = world[static_cast<std::size_t>(id - 1)].omega;
      if (cfg.features.noise) {
        if (cfg.noise.sigma_v > 0.0) {
          RandomStream sv(cfg.noise.seed, NoiseDomain::LinearVelocity,
                          static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(k), 0);
          v_meas += sv.gaussian3(cfg.noise.sigma_v);
        }
        if (cfg.noise.sigma_omega > 0.0) {
          RandomStream sw(cfg.noise.seed, NoiseDomain::AngularVelocity,
                          static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(k), 0);
          omega_meas += sw.gaussian3(cfg.noise.sigma_omega);
        }
      }

      StepInputs inputs;
      inputs.step = k;
      inputs.t = t_new;
      inputs.dt = cfg.dt;
      inputs.vehicle = id;
      inputs.v_meas = v_meas;
      inputs.omega_meas = omega_meas;
      for (const auto& m : sensed.measurements) {
        if (m.observer == id) inputs.bearings.push_back(m);
      }
      for (AgentId j : acfg.neighbors) {
        EstimateMessage msg;
        msg.sender = j;
        if (graph.is_landmark(j)) {
          msg.R_hat = world[static_cast<std::size_t>(j - 1)].pose.R;
          msg.p_hat = world[static_cast<std::size_t>(j - 1)].pose.p;
          msg.t = t_new;
        } else if (cfg.comm == CommMode::Topological) {
          const auto& nb = observers[static_cast<std::size_t>(j - n_l - 1)];
          msg.R_hat = nb.R_hat;
          msg.p_hat = nb.p_hat;
          msg.t = t_new;
        } else {
          const auto& nb = prev_observers[static_cast<std::size_t>(j - n_l - 1)];
          msg.R_hat = nb.R_hat;
          msg.p_hat = nb.p_hat;
          msg.t = t_new - cfg.dt;
        }
        inputs.messages.push_back(msg);
      }

      const ObserverState before = observers[static_cast<std::size_t>(vi)];
      try {
        const MeasurementModel model =
            assemble_measurement(before, inputs.bearings, inputs.messages);
        observers[static_cast<std::size_t>(vi)] =
            observer_step(before, v_meas, omega_meas, model, cfg.dt,
                          &infos[static_cast<std::size_t>(vi)]);
      } catch (const std::exception& ex) {
        throw SimulationError(k, t_new, "vehicle " + std::to_string(id) + ": " + ex.what());
      }
      const ObserverState& after = observers[static_cast<std::size_t>(vi)];
      if (!after.p_hat.allFinite() || !after.P.allFinite()) {
        throw SimulationError(k, t_new,
                              "vehicle " + std::to_string(id) + ": estimate diverged");
      }
      if (tap) tap(inputs, before, after);
    }

    // 5. Record.
    record_step(k, t_new, sensed.snapshot, infos);
  }

  out.final_observers = observers;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace cooploc
