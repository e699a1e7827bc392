#pragma once

// Body-frame bearing measurements with a pinhole-style noise model, camera
// field-of-view and occlusion-sphere visibility, and the per-step sensing
// sweep that produces each vehicle's measurement set plus the active topology.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cooploc/geometry.hpp"
#include "cooploc/graph.hpp"
#include "cooploc/rng.hpp"
#include "cooploc/types.hpp"
#include "cooploc/world.hpp"

namespace cooploc {

struct CameraModel {
  double half_angle_h = 1.0;       // rad, about the boresight
  double half_angle_v = 0.8;       // rad
  double max_range = 50.0;         // m
  Vec3 boresight = Vec3(0, 0, 1);  // body frame, unit

  void validate() const {
    if (!(half_angle_h > 0.0 && half_angle_h < M_PI / 2.0) ||
        !(half_angle_v > 0.0 && half_angle_v < M_PI / 2.0)) {
      throw std::invalid_argument("CameraModel: half-angles must lie in (0, pi/2)");
    }
    if (!(max_range > 0.0)) throw std::invalid_argument("CameraModel: max_range must be positive");
    if (std::abs(boresight.norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("CameraModel: boresight must be unit length");
    }
  }
};

struct NoiseConfig {
  double sigma_v = 0.1;          // m/s, Gaussian, on measured linear velocity
  double sigma_omega = 0.01;     // rad/s, Gaussian, on measured angular velocity
  double bearing_bound = 0.005;  // max deviation of uniform image-plane noise
  std::uint64_t seed = 1;
};

struct BearingMeasurement {
  AgentId observer = 0;
  AgentId target = 0;
  Bearing g;
  double t = 0.0;

  BearingMeasurement(AgentId obs, AgentId tgt, Bearing bearing, double time)
      : observer(obs), target(tgt), g(bearing), t(time) {}
};

struct EstimateMessage {
  AgentId sender = 0;
  Rotation R_hat;
  Vec3 p_hat = Vec3::Zero();  // sender body frame
  double t = 0.0;
};

// Direction from the target toward the observer, in the observer's body frame:
// g = (p - Rᵀ p̄_target)/|...|. Rejects near-collocated agents (< 1e-9 m).
inline Bearing true_bearing(const Pose& observer, const Vec3& target_inertial) {
  const Vec3 d = observer.p - observer.R.transposed() * target_inertial;
  if (!(d.norm() > 1e-9)) {
    throw std::invalid_argument("true_bearing: observer and target are collocated");
  }
  return Bearing(d);
}

// Unit ray for normalized image coordinates: p' = (px, py, 1)ᵀ/|...|. Note this
// is the camera-frame ray toward the detection; the observer convention points
// the other way, so camera-ingested bearings are negated before use.
inline Bearing bearing_from_image(double px, double py) {
  return Bearing(Vec3(px, py, 1.0));
}

// Deterministic core of the image-plane noise model:
// gⁿ = sign(g₃)·p'/|p'| with p' = (g₁/g₃ + n₁, g₂/g₃ + n₂, 1)ᵀ.
// Undefined for |g₃| < 1e-6 (sensing drops such bearings instead).
inline Bearing noisy_bearing_components(const Bearing& g, double n1, double n2) {
  const Vec3& v = g.vector();
  if (std::abs(v.z()) < 1e-6) {
    throw std::invalid_argument("noisy_bearing: bearing too close to the image plane");
  }
  if (n1 == 0.0 && n2 == 0.0) return g;  // exact pass-through when noise-free
  const double s = (v.z() > 0.0) ? 1.0 : -1.0;
  const Vec3 p_prime(v.x() / v.z() + n1, v.y() / v.z() + n2, 1.0);
  return Bearing(s * p_prime);
}

inline Bearing noisy_bearing(const Bearing& g, const NoiseConfig& noise, RandomStream& stream) {
  if (noise.bearing_bound == 0.0) return g;
  const double n1 = stream.uniform(-noise.bearing_bound, noise.bearing_bound);
  const double n2 = stream.uniform(-noise.bearing_bound, noise.bearing_bound);
  return noisy_bearing_components(g, n1, n2);
}

namespace detail {

// Deterministic camera frame around the boresight: x_c spans "horizontal".
inline void camera_axes(const CameraModel& cam, Vec3& x_c, Vec3& y_c, Vec3& z_c) {
  z_c = cam.boresight.normalized();
  const Vec3 ref = (std::abs(z_c.x()) <= 0.9) ? Vec3::UnitX() : Vec3::UnitY();
  x_c = (ref - ref.dot(z_c) * z_c).normalized();
  y_c = z_c.cross(x_c);
}

// Shortest distance from point c to segment [a, b].
inline double point_segment_distance(const Vec3& c, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (c - a).norm();
  const double s = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
  return (c - (a + s * ab)).norm();
}

}  // namespace detail

// Geometric visibility: range, rectangular field of view about the boresight,
// and occlusion by other agents' spheres. `radius_by_id` is indexed id-1.
inline bool visible(const AgentState& observer, const AgentState& target,
                    const std::vector<AgentState>& others, const CameraModel& cam,
                    const std::vector<double>& radius_by_id) {
  const Vec3 a = observer.pose.inertial_position();
  const Vec3 b = target.pose.inertial_position();
  const Vec3 d_inertial = b - a;
  const double range = d_inertial.norm();
  if (range > cam.max_range) return false;
  if (!(range > 1e-9)) return false;

  Vec3 x_c, y_c, z_c;
  detail::camera_axes(cam, x_c, y_c, z_c);
  const Vec3 d_body = observer.pose.R.transposed() * d_inertial;
  const double along = d_body.dot(z_c);
  if (along <= 0.0) return false;
  if (std::abs(std::atan2(d_body.dot(x_c), along)) > cam.half_angle_h) return false;
  if (std::abs(std::atan2(d_body.dot(y_c), along)) > cam.half_angle_v) return false;

  for (const auto& other : others) {
    if (other.id == observer.id || other.id == target.id) continue;
    const double r = radius_by_id.at(static_cast<std::size_t>(other.id - 1));
    if (r <= 0.0) continue;
    if (detail::point_segment_distance(other.pose.inertial_position(), a, b) < r) return false;
  }
  return true;
}

struct DroppedEdge {
  AgentId observer = 0;
  AgentId target = 0;
  std::string reason;
};

struct SensingResult {
  TopologySnapshot snapshot;
  std::vector<BearingMeasurement> measurements;
  std::vector<DroppedEdge> drops;
};

// One sensing sweep over every vehicle's declared neighbors. Bearings near the
// image plane (|g_z| < 1e-6) are dropped and logged. Noise substreams are keyed
// by (seed, observer, step, target), so realizations are independent of
// evaluation order and of which other edges are active.
inline SensingResult sense_all(const std::vector<AgentState>& world, const InteractionGraph& graph,
                               const CameraModel& cam, const NoiseConfig& noise,
                               const std::vector<double>& radius_by_id, bool visibility_gating,
                               bool noise_enabled, double t, std::uint32_t step) {
  SensingResult out;
  out.snapshot.t = t;
  out.snapshot.active.resize(static_cast<std::size_t>(graph.n_vehicles));

  auto state_of = [&](AgentId id) -> const AgentState& {
    return world.at(static_cast<std::size_t>(id - 1));
  };

  for (AgentId id = graph.n_landmarks + 1; id <= graph.agent_count(); ++id) {
    auto& active = out.snapshot.active[static_cast<std::size_t>(id - graph.n_landmarks - 1)];
    const AgentState& obs = state_of(id);
    for (AgentId j : graph.neighbors_of(id)) {
      const AgentState& tgt = state_of(j);
      if (visibility_gating && !visible(obs, tgt, world, cam, radius_by_id)) {
        continue;  // silent: out of view is normal operation, not an anomaly
      }
      const Bearing g = true_bearing(obs.pose, tgt.pose.inertial_position());
      if (std::abs(g.vector().z()) < 1e-6) {
        out.drops.push_back({id, j, "bearing parallel to the image plane"});
        continue;
      }
      Bearing measured = g;
      if (noise_enabled && noise.bearing_bound > 0.0) {
        RandomStream stream(noise.seed, NoiseDomain::Bearing, static_cast<std::uint32_t>(id), step,
                            static_cast<std::uint32_t>(j));
        measured = noisy_bearing(g, noise, stream);
      }
      active.push_back(j);
      out.measurements.emplace_back(id, j, measured, t);
    }
  }
  return out;
}

}  // namespace cooploc
