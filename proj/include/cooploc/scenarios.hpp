#pragma once

// Built-in scenario library: a five-vehicle busy intersection, plus two
// small-scale single- and two-vehicle setups exercising scripted occlusions
// (a crossing moving landmark and an overtaking maneuver).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cooploc/scenario.hpp"

namespace cooploc {

// Three static landmarks, five vehicles crossing an intersection, per-vehicle
// cascaded neighbor sets. Two vehicles head north, three head east; initial
// estimates start several meters off with a 90-degree heading error.
inline ScenarioConfig busy_intersection() {
  ScenarioConfig cfg;
  cfg.name = "busy_intersection";
  cfg.dt = 1.0 / 60.0;
  cfg.duration = 60.0;
  cfg.noise.sigma_v = 0.1;
  cfg.noise.sigma_omega = 0.01;
  cfg.noise.bearing_bound = 0.005;
  cfg.noise.seed = 1;
  cfg.default_gains.k = 1.0;
  cfg.default_gains.q = 10.0;
  cfg.default_gains.v_diag << 0.1, 0.1, 0.1, 1.0, 1.0, 1.0;
  cfg.default_gains.p0_diag << 1.0, 1.0, 1.0, 100.0, 100.0, 100.0;
  cfg.features.visibility = false;
  cfg.features.noise = true;
  cfg.features.observability_log = true;
  // Slightly above the noisy steady-state error floor so time-to-threshold is
  // meaningful both with and without measurement noise.
  cfg.error_threshold = 0.05;

  const auto landmark = [](AgentId id, const Vec3& p) {
    AgentConfig a;
    a.id = id;
    a.kind = AgentKind::Landmark;
    a.trajectory = StaticTrajectory{p, 0.0};
    return a;
  };
  cfg.agents.push_back(landmark(1, Vec3(-4, 5, 3)));
  cfg.agents.push_back(landmark(2, Vec3(4, 4, 5)));
  cfg.agents.push_back(landmark(3, Vec3(4, -3, 4)));

  const UnitQuaternion att0 =
      UnitQuaternion::from_components(std::sqrt(2.0) / 2.0, Vec3(0, 0, std::sqrt(2.0) / 2.0));
  const auto vehicle = [&](AgentId id, const Vec3& start, const Vec3& vel,
                           const Vec3& p_bar_hat, std::vector<AgentId> neighbors) {
    AgentConfig a;
    a.id = id;
    a.kind = AgentKind::Vehicle;
    a.trajectory = LinearTrajectory{start, vel};
    a.neighbors = std::move(neighbors);
    a.initial_position_estimate = p_bar_hat;
    a.initial_attitude_estimate = att0;
    return a;
  };
  cfg.agents.push_back(vehicle(4, Vec3(-2, -16, 2.5), Vec3(0, 0.6, 0), Vec3(0, -5, 5), {1, 2, 3}));
  cfg.agents.push_back(vehicle(5, Vec3(-2, -19, 2), Vec3(0, 0.5, 0), Vec3(5, -14, 6), {2, 3, 4}));
  cfg.agents.push_back(vehicle(6, Vec3(-17, 2, 3), Vec3(0.6, 0, 0), Vec3(-8, 3, 5), {2, 3, 5}));
  cfg.agents.push_back(
      vehicle(7, Vec3(-19, 2, 3.5), Vec3(0.45, 0, 0), Vec3(-14, 6, 6), {3, 5, 6}));
  cfg.agents.push_back(vehicle(8, Vec3(-30, 2, 3), Vec3(0.6, 0, 0), Vec3(-24, 7, 6), {4, 5, 7}));
  return cfg;
}

namespace detail {

inline void add_small_landmarks(ScenarioConfig& cfg) {
  const auto landmark = [](AgentId id, const Vec3& p) {
    AgentConfig a;
    a.id = id;
    a.kind = AgentKind::Landmark;
    a.trajectory = StaticTrajectory{p, 0.0};
    a.radius = 0.05;
    return a;
  };
  cfg.agents.push_back(landmark(1, Vec3(-1.5, 1.2, 0.8)));
  cfg.agents.push_back(landmark(2, Vec3(1.2, 1.4, 1.0)));
  cfg.agents.push_back(landmark(3, Vec3(-1.3, -1.2, 0.9)));
  cfg.agents.push_back(landmark(4, Vec3(1.4, -1.3, 0.7)));
}

inline void set_small_common(ScenarioConfig& cfg) {
  cfg.dt = 1.0 / 60.0;
  cfg.noise.sigma_v = 0.02;
  cfg.noise.sigma_omega = 0.005;
  cfg.noise.bearing_bound = 0.005;
  cfg.noise.seed = 1;
  cfg.default_gains.k = 80.0;
  cfg.default_gains.q = 25.0;
  cfg.default_gains.v_diag << 0.1, 0.1, 0.1, 1.0, 1.0, 1.0;
  cfg.default_gains.p0_diag << 1.0, 1.0, 1.0, 10.0, 10.0, 10.0;
  cfg.features.visibility = false;
  cfg.features.noise = true;
  cfg.features.observability_log = true;
  cfg.error_threshold = 0.1;
  cfg.camera.max_range = 10.0;
}

inline UnitQuaternion small_initial_attitude() {
  const double half = M_PI / 8.0;  // 45 degrees about z
  return UnitQuaternion::from_components(std::cos(half), Vec3(0, 0, std::sin(half)));
}

}  // namespace detail

// One vehicle driving north through an intersection while a moving landmark
// crosses eastbound in front of it. The moving landmark is only in view for a
// mid-run window, during which it occludes two static landmarks.
inline ScenarioConfig crossing_path() {
  ScenarioConfig cfg;
  cfg.name = "crossing_path";
  detail::set_small_common(cfg);
  cfg.duration = 25.0;
  detail::add_small_landmarks(cfg);

  AgentConfig ml;  // eastbound vehicle with known position, used as a landmark
  ml.id = 5;
  ml.kind = AgentKind::Landmark;
  ml.trajectory = LinearTrajectory{Vec3(-2.5, 0.8, 0.35), Vec3(0.25, 0, 0)};
  ml.radius = 0.12;
  cfg.agents.push_back(ml);

  AgentConfig f1;
  f1.id = 6;
  f1.kind = AgentKind::Vehicle;
  f1.trajectory = LinearTrajectory{Vec3(0.3, -2.2, 0.2), Vec3(0, 0.22, 0)};
  f1.neighbors = {1, 2, 3, 4, 5};
  f1.initial_position_estimate = Vec3(0.8, -1.6, 0.5);
  f1.initial_attitude_estimate = detail::small_initial_attitude();
  f1.radius = 0.12;
  cfg.agents.push_back(f1);

  // The moving landmark is detectable only while it crosses the camera's
  // sector; while centered in front it masks two static landmarks.
  cfg.occlusion_windows.push_back({6, 5, 0.0, 8.0});
  cfg.occlusion_windows.push_back({6, 5, 14.0, cfg.duration});
  cfg.occlusion_windows.push_back({6, 2, 9.0, 13.0});
  cfg.occlusion_windows.push_back({6, 4, 9.0, 13.0});
  return cfg;
}

// Two vehicles eastbound in adjacent lanes; the rear one is faster and passes
// mid-run. The follower measures the leader only while it is ahead, and the
// leader masks two static landmarks from the follower while alongside.
inline ScenarioConfig overtaking() {
  ScenarioConfig cfg;
  cfg.name = "overtaking";
  detail::set_small_common(cfg);
  cfg.duration = 20.0;
  detail::add_small_landmarks(cfg);

  AgentConfig f1;  // the overtaking vehicle
  f1.id = 5;
  f1.kind = AgentKind::Vehicle;
  f1.trajectory = LinearTrajectory{Vec3(-3.4, 0.55, 0.3), Vec3(0.35, 0, 0)};
  f1.neighbors = {1, 2, 3, 4};
  f1.initial_position_estimate = Vec3(-2.9, 1.15, 0.7);
  f1.initial_attitude_estimate = detail::small_initial_attitude();
  f1.radius = 0.12;
  cfg.agents.push_back(f1);

  AgentConfig f2;  // the vehicle being passed; uses f1 as a neighbor
  f2.id = 6;
  f2.kind = AgentKind::Vehicle;
  f2.trajectory = LinearTrajectory{Vec3(-2.0, 0.25, 0.22), Vec3(0.20, 0, 0)};
  f2.neighbors = {1, 2, 3, 4, 5};
  f2.initial_position_estimate = Vec3(-1.4, -0.35, 0.6);
  f2.initial_attitude_estimate = detail::small_initial_attitude();
  f2.radius = 0.12;
  cfg.agents.push_back(f2);

  // The follower sees the leader only around the pass, and loses two static
  // landmarks behind it while the vehicles are alongside.
  cfg.occlusion_windows.push_back({6, 5, 0.0, 6.0});
  cfg.occlusion_windows.push_back({6, 5, 13.0, cfg.duration});
  cfg.occlusion_windows.push_back({6, 1, 8.5, 11.5});
  cfg.occlusion_windows.push_back({6, 2, 8.5, 11.5});
  return cfg;
}

inline std::vector<std::string> scenario_names() {
  return {"busy_intersection", "crossing_path", "overtaking"};
}

inline ScenarioConfig scenario_by_name(const std::string& name) {
  if (name == "busy_intersection") return busy_intersection();
  if (name == "crossing_path") return crossing_path();
  if (name == "overtaking") return overtaking();
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (known: busy_intersection, crossing_path, overtaking)");
}

}  // namespace cooploc
