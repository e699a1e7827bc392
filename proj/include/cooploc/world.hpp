#pragma once

// Ground-truth agent state and its propagation. Position lives in the body
// frame (ṗ = -S(ω)p + v); the inertial position is R p. Rotation advances by
// the exact exponential, position by one RK4 step with (v, ω) held constant.

#include "cooploc/geometry.hpp"
#include "cooploc/trajectory.hpp"
#include "cooploc/types.hpp"

namespace cooploc {

struct Pose {
  Rotation R;
  Vec3 p = Vec3::Zero();  // body-frame position

  Vec3 inertial_position() const { return R * p; }
};

struct AgentState {
  AgentId id = 0;
  AgentKind kind = AgentKind::Vehicle;
  Pose pose;
  Vec3 v = Vec3::Zero();      // body-frame linear velocity
  Vec3 omega = Vec3::Zero();  // body-frame angular velocity
};

// One RK4 step of ṗ = -S(ω)p + v with constant inputs. Shared by truth
// propagation and the observer's prediction so that exact estimates track
// truth bit-for-bit.
inline Vec3 body_position_step(const Vec3& p, const Vec3& v, const Vec3& omega, double dt) {
  const auto f = [&](const Vec3& x) -> Vec3 { return v - omega.cross(x); };
  const Vec3 k1 = f(p);
  const Vec3 k2 = f(p + 0.5 * dt * k1);
  const Vec3 k3 = f(p + 0.5 * dt * k2);
  const Vec3 k4 = f(p + dt * k3);
  return p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline AgentState propagate(const AgentState& state, double dt) {
  AgentState out = state;
  out.pose.p = body_position_step(state.pose.p, state.v, state.omega, dt);
  out.pose.R = integrate_rotation(state.pose.R, state.omega, dt);
  return out;
}

// Initial truth state on a declared trajectory.
inline AgentState initial_state(AgentId id, AgentKind kind, const Trajectory& traj) {
  const auto s = sample_trajectory(traj, 0.0);
  AgentState st;
  st.id = id;
  st.kind = kind;
  st.pose.R = s.R;
  st.pose.p = s.R.transposed() * s.p_bar;
  st.v = s.v;
  st.omega = s.omega;
  return st;
}

}  // namespace cooploc
