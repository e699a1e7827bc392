#pragma once

// Declared agent paths. A trajectory provides the inertial pose in closed form
// plus the body-frame (v, ω) pair that reproduces it through the kinematics
// ṗ = -S(ω)p + v, Ṙ = RS(ω). The simulator integrates truth from (v, ω); the
// closed form exists for initialization and cross-checks.

#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cooploc/geometry.hpp"
#include "cooploc/types.hpp"

namespace cooploc {

struct TrajectorySample {
  Rotation R;
  Vec3 p_bar = Vec3::Zero();   // inertial position
  Vec3 v = Vec3::Zero();       // body-frame linear velocity
  Vec3 omega = Vec3::Zero();   // body-frame angular velocity
};

struct StaticTrajectory {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

// Constant inertial velocity, identity orientation.
struct LinearTrajectory {
  Vec3 start = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct Waypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

// Cubic Hermite through the waypoints (central-difference tangents), yaw
// tracking the horizontal path tangent. Heading changes show up as ω about z.
struct WaypointTrajectory {
  std::vector<Waypoint> points;
};

// Programmatic escape hatch; not representable in scenario files.
struct CustomTrajectory {
  std::function<TrajectorySample(double)> sample;
};

using Trajectory = std::variant<StaticTrajectory, LinearTrajectory, WaypointTrajectory, CustomTrajectory>;

namespace detail {

struct HermiteEval {
  Vec3 p;
  Vec3 dp;
  Vec3 ddp;
};

inline HermiteEval eval_waypoints(const WaypointTrajectory& traj, double t) {
  const auto& pts = traj.points;
  if (pts.size() < 2) {
    throw std::invalid_argument("WaypointTrajectory: need at least two waypoints");
  }
  if (t <= pts.front().t) t = pts.front().t;
  if (t >= pts.back().t) t = pts.back().t;
  std::size_t seg = 0;
  while (seg + 2 < pts.size() && t > pts[seg + 1].t) ++seg;

  auto tangent = [&](std::size_t k) -> Vec3 {
    const std::size_t lo = (k == 0) ? 0 : k - 1;
    const std::size_t hi = (k + 1 == pts.size()) ? k : k + 1;
    const double dt = pts[hi].t - pts[lo].t;
    if (dt <= 0.0) throw std::invalid_argument("WaypointTrajectory: times must be increasing");
    return (pts[hi].position - pts[lo].position) / dt;
  };

  const double h = pts[seg + 1].t - pts[seg].t;
  if (h <= 0.0) throw std::invalid_argument("WaypointTrajectory: times must be increasing");
  const double s = (t - pts[seg].t) / h;
  const Vec3& p0 = pts[seg].position;
  const Vec3& p1 = pts[seg + 1].position;
  const Vec3 m0 = tangent(seg) * h;
  const Vec3 m1 = tangent(seg + 1) * h;

  const double s2 = s * s, s3 = s2 * s;
  HermiteEval out;
  out.p = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 +
          (s3 - s2) * m1;
  out.dp = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 +
            (3 * s2 - 2 * s) * m1) /
           h;
  out.ddp = ((12 * s - 6) * p0 + (6 * s - 4) * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * m1) /
            (h * h);
  return out;
}

inline double waypoint_heading(const HermiteEval& e, double fallback) {
  const double n2 = e.dp.x() * e.dp.x() + e.dp.y() * e.dp.y();
  if (n2 < 1e-18) return fallback;
  return std::atan2(e.dp.y(), e.dp.x());
}

inline double waypoint_heading_rate(const HermiteEval& e) {
  const double n2 = e.dp.x() * e.dp.x() + e.dp.y() * e.dp.y();
  if (n2 < 1e-12) return 0.0;
  return (e.dp.x() * e.ddp.y() - e.dp.y() * e.ddp.x()) / n2;
}

}  // namespace detail

inline TrajectorySample sample_trajectory(const Trajectory& traj, double t) {
  TrajectorySample out;
  if (const auto* st = std::get_if<StaticTrajectory>(&traj)) {
    out.R = Rotation::about_z(st->yaw);
    out.p_bar = st->position;
  } else if (const auto* lin = std::get_if<LinearTrajectory>(&traj)) {
    out.R = Rotation::identity();
    out.p_bar = lin->start + t * lin->velocity;
    out.v = lin->velocity;  // R = I, so body and inertial velocity coincide
  } else if (const auto* wp = std::get_if<WaypointTrajectory>(&traj)) {
    const auto e = detail::eval_waypoints(*wp, t);
    const auto e0 = detail::eval_waypoints(*wp, wp->points.front().t);
    const double psi = detail::waypoint_heading(e, detail::waypoint_heading(e0, 0.0));
    out.R = Rotation::about_z(psi);
    out.p_bar = e.p;
    out.v = out.R.transposed() * e.dp;
    out.omega = Vec3(0.0, 0.0, detail::waypoint_heading_rate(e));
  } else {
    const auto& fn = std::get<CustomTrajectory>(traj).sample;
    if (!fn) throw std::invalid_argument("CustomTrajectory: no sample function set");
    out = fn(t);
  }
  return out;
}

inline Rotation orientation_at(const Trajectory& traj, double t) { return sample_trajectory(traj, t).R; }
inline Vec3 inertial_position_at(const Trajectory& traj, double t) { return sample_trajectory(traj, t).p_bar; }

struct BodyVelocities {
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

inline BodyVelocities velocities_for_trajectory(const Trajectory& traj, double t) {
  const auto s = sample_trajectory(traj, t);
  return {s.v, s.omega};
}

}  // namespace cooploc
