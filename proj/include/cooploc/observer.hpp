#pragma once

// Per-vehicle deterministic Riccati observer. State is (R̂, p̂) with a 6x6
// covariance-like matrix P over x̃ = (2λ, p̃), driven by projected bearing
// outputs y_j = Π_g R̂ᵀ(R̂_j p̂_j) of the neighbors and the vehicle's own
// measured (v, ω).
//
// A step splits into prediction (open-loop kinematics over dt, matching truth
// propagation exactly) and correction (the gain flow integrated over dt with
// the frame's raw measurements held fixed). The correction is stiff for large
// k·P·CᵀQ, so it is integrated with stability-bounded adaptive substeps; the
// innovation, gain, and Riccati right-hand side are re-evaluated as the
// estimate moves, which reproduces the continuous-time law the gains assume.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cooploc/geometry.hpp"
#include "cooploc/sensing.hpp"
#include "cooploc/types.hpp"
#include "cooploc/world.hpp"

namespace cooploc {

struct ObserverGains {
  double k = 1.0;                                   // must exceed 1/2
  std::vector<std::pair<AgentId, double>> q;        // per declared neighbor
  Mat6 V = Mat6::Identity();                        // CRE drift term, SPD
  Mat6 P0 = Mat6::Identity();                       // initial P, SPD

  double q_for(AgentId neighbor) const {
    for (const auto& [id, w] : q) {
      if (id == neighbor) return w;
    }
    throw std::invalid_argument("ObserverGains: no q weight for neighbor " +
                                std::to_string(neighbor));
  }

  void validate() const {
    if (!(k > 0.5)) throw std::invalid_argument("ObserverGains: k must be greater than 1/2");
    for (const auto& [id, w] : q) {
      if (!(w > 0.0)) {
        throw std::invalid_argument("ObserverGains: q weights must be positive (neighbor " +
                                    std::to_string(id) + ")");
      }
    }
    const auto check_spd = [](const Mat6& m, const char* name) {
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument(std::string("ObserverGains: ") + name + " must be symmetric");
      }
      Eigen::LLT<Mat6> llt(m);
      if (llt.info() != Eigen::Success) {
        throw std::invalid_argument(std::string("ObserverGains: ") + name +
                                    " must be positive definite");
      }
    };
    check_spd(V, "V");
    check_spd(P0, "P0");
  }
};

// Stacked measurement model for one vehicle: y = C1·2λ + C2·p - D + h.o.t.
// Row blocks follow row_map, the active subsequence of the declared neighbor
// order. neighbor_inertial keeps each neighbor's communicated inertial
// position estimate R̂_j p̂_j, the raw quantity the correction flow needs.
// D needs ground truth and is filled only when it is supplied (diagnostics).
struct MeasurementModel {
  VecX y;
  MatX C1;  // 3m x 3, blocks -Π_g S(R̂ᵢᵀ R̂_j p̂_j)
  MatX C2;  // 3m x 3, blocks Π_g
  VecX D;   // 3m, blocks Π_g R̂ᵢᵀ(p̄_j - R̂_j p̂_j); zero unless truth given
  std::vector<AgentId> row_map;
  std::vector<Vec3> neighbor_inertial;
  std::vector<double> row_weight;  // q_ij per row block

  int rows() const { return static_cast<int>(row_map.size()) * 3; }
  int blocks() const { return static_cast<int>(row_map.size()); }

  MatX stacked_C() const {
    MatX c(rows(), 6);
    c.leftCols<3>() = C1;
    c.rightCols<3>() = C2;
    return c;
  }
  MatX q_matrix() const {
    MatX q = MatX::Zero(rows(), rows());
    for (int b = 0; b < blocks(); ++b) {
      q.block<3, 3>(3 * b, 3 * b) = row_weight[static_cast<std::size_t>(b)] * Mat3::Identity();
    }
    return q;
  }
};

struct ObserverState {
  Rotation R_hat;
  Vec3 p_hat = Vec3::Zero();
  Mat6 P = Mat6::Identity();
  ObserverGains gains;
};

struct ErrorDiagnostics {
  Vec3 lambda = Vec3::Zero();          // vector part of the error quaternion, λ̊ >= 0
  Vec3 p_err_body = Vec3::Zero();      // p - p̂
  Vec3 p_err_inertial = Vec3::Zero();  // p̄ - R̂ p̂
  Vec6 x_err = Vec6::Zero();           // (2λ, p̃)
  double rotation_angle = 0.0;         // 2·asin(|λ|), rad
};

struct ObserverStepInfo {
  double innovation_norm = 0.0;  // at the start of the correction flow
  double min_eig_P = 0.0;        // after the step
  int substeps = 0;
  bool clamped = false;  // P hit the positive-definiteness floor
};

// Builds the stacked model from this vehicle's bearings and its neighbors'
// communicated estimates. Every measured target must have an estimate message;
// landmark messages simply carry the true pose. `truth_inertial` (id -> p̄_j)
// enables the D column for diagnostics and tests.
inline MeasurementModel assemble_measurement(
    const ObserverState& self, const std::vector<BearingMeasurement>& bearings,
    const std::vector<EstimateMessage>& neighbor_estimates,
    const std::unordered_map<AgentId, Vec3>* truth_inertial = nullptr) {
  MeasurementModel m;
  const int n = static_cast<int>(bearings.size());
  m.y.resize(3 * n);
  m.C1.resize(3 * n, 3);
  m.C2.resize(3 * n, 3);
  m.D = VecX::Zero(3 * n);
  m.row_map.reserve(bearings.size());
  m.neighbor_inertial.reserve(bearings.size());
  m.row_weight.reserve(bearings.size());

  const Mat3 R_hat_t = self.R_hat.matrix().transpose();
  for (int b = 0; b < n; ++b) {
    const auto& meas = bearings[static_cast<std::size_t>(b)];
    const EstimateMessage* est = nullptr;
    for (const auto& e : neighbor_estimates) {
      if (e.sender == meas.target) {
        est = &e;
        break;
      }
    }
    if (est == nullptr) {
      throw std::invalid_argument("assemble_measurement: no estimate message from agent " +
                                  std::to_string(meas.target));
    }
    const Vec3 w_j = est->R_hat * est->p_hat;  // neighbor's inertial position estimate
    const Mat3 pi = projector(meas.g);
    const Vec3 u_j = R_hat_t * w_j;
    m.y.segment<3>(3 * b) = pi * u_j;
    m.C1.middleRows<3>(3 * b) = -pi * skew(u_j);
    m.C2.middleRows<3>(3 * b) = pi;
    if (truth_inertial != nullptr) {
      const auto it = truth_inertial->find(meas.target);
      if (it == truth_inertial->end()) {
        throw std::invalid_argument("assemble_measurement: no true position for agent " +
                                    std::to_string(meas.target));
      }
      m.D.segment<3>(3 * b) = pi * (R_hat_t * (it->second - w_j));
    }
    m.row_map.push_back(meas.target);
    m.neighbor_inertial.push_back(w_j);
    m.row_weight.push_back(self.gains.q_for(meas.target));
  }
  return m;
}

// Right-hand side of the continuous Riccati equation.
inline Mat6 cre_derivative(const Mat6& P, const Mat6& A, const Mat6& M, const Mat6& V) {
  return A * P + P * A.transpose() - P * M * P + V;
}

// One RK4 step of Ṗ = AP + PAᵀ - PCᵀQCP + V, then symmetrization. Inputs are
// held constant over the step.
inline Mat6 riccati_step(const Mat6& P, const Mat6& A, const MatX& C, const MatX& Q, const Mat6& V,
                         double dt) {
  const Mat6 M = C.transpose() * Q * C;
  const Mat6 k1 = cre_derivative(P, A, M, V);
  const Mat6 k2 = cre_derivative(P + 0.5 * dt * k1, A, M, V);
  const Mat6 k3 = cre_derivative(P + 0.5 * dt * k2, A, M, V);
  const Mat6 k4 = cre_derivative(P + dt * k3, A, M, V);
  const Mat6 next = P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return 0.5 * (next + next.transpose());
}

struct GainSplit {
  MatX K1;  // 3 x 3m, rotation correction rows
  MatX K2;  // 3 x 3m, position correction rows
};

// K = k P CᵀQ, split into its rotation and position halves.
inline GainSplit gain(const Mat6& P, const MatX& C, const MatX& Q, double k) {
  const MatX full = k * P * C.transpose() * Q;  // 6 x 3m
  return {full.topRows<3>(), full.bottomRows<3>()};
}

namespace detail {

// Floor the spectrum of P at `floor_eig`; returns true if clamping occurred.
inline bool enforce_pd(Mat6& P, double floor_eig) {
  P = 0.5 * (P + P.transpose());
  const Eigen::LLT<Mat6> llt(Mat6(P - floor_eig * Mat6::Identity()));
  if (llt.info() == Eigen::Success) return false;
  const Eigen::SelfAdjointEigenSolver<Mat6> es(P, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < floor_eig) {
    P += (floor_eig - min_eig) * Mat6::Identity();
    return true;
  }
  return false;
}

// Correction-flow ingredients at the current estimate, with the frame's raw
// measurements (projectors and neighbor inertial estimates) held fixed.
struct CorrectionFrame {
  const MeasurementModel* model;
  Mat6 A;
  Mat6 V;
  double k;

  // Innovation and output matrices at (R̂, p̂).
  void evaluate(const Rotation& R_hat, const Vec3& p_hat, VecX& e, MatX& C) const {
    const int blocks = model->blocks();
    e.resize(3 * blocks);
    C.resize(3 * blocks, 6);
    const Mat3 R_hat_t = R_hat.matrix().transpose();
    for (int b = 0; b < blocks; ++b) {
      const Mat3 pi = model->C2.middleRows<3>(3 * b);
      const Vec3 u_j = R_hat_t * model->neighbor_inertial[static_cast<std::size_t>(b)];
      e.segment<3>(3 * b) = pi * (u_j - p_hat);
      C.block<3, 3>(3 * b, 0) = -pi * skew(u_j);
      C.block<3, 3>(3 * b, 3) = pi;
    }
  }

  Mat6 weighted_normal(const MatX& C) const {
    Mat6 m = Mat6::Zero();
    for (int b = 0; b < model->blocks(); ++b) {
      const double q = model->row_weight[static_cast<std::size_t>(b)];
      m += q * C.middleRows<3>(3 * b).transpose() * C.middleRows<3>(3 * b);
    }
    return m;
  }

  VecX weighted(const VecX& e) const {
    VecX we = e;
    for (int b = 0; b < model->blocks(); ++b) {
      we.segment<3>(3 * b) *= model->row_weight[static_cast<std::size_t>(b)];
    }
    return we;
  }
};

}  // namespace detail

// Advances one vehicle's observer over dt given its measured velocities and
// the frame's measurement model. Prediction uses the same integrators as truth
// propagation; with exact estimates and noise-free inputs the innovation stays
// at rounding level and the estimate never drifts from truth.
inline ObserverState observer_step(const ObserverState& state, const Vec3& v_meas,
                                   const Vec3& omega_meas, const MeasurementModel& model,
                                   double dt, ObserverStepInfo* info = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("observer_step: dt must be positive");
  constexpr double kPdFloor = 1e-12;
  constexpr double kStepBudget = 0.4;  // max (rate · h) per substep, RK4-stable
  constexpr int kMaxSubsteps = 200000;

  ObserverState out = state;

  // Prediction: open-loop kinematics with the measured velocities.
  out.p_hat = body_position_step(state.p_hat, v_meas, omega_meas, dt);
  out.R_hat = integrate_rotation(state.R_hat, omega_meas, dt);

  detail::CorrectionFrame frame;
  frame.model = &model;
  const Mat3 neg_skew_w = -skew(omega_meas);
  frame.A.setZero();
  frame.A.topLeftCorner<3, 3>() = neg_skew_w;
  frame.A.bottomRightCorner<3, 3>() = neg_skew_w;
  frame.V = state.gains.V;
  frame.k = state.gains.k;

  ObserverStepInfo local;
  VecX e;
  MatX C;
  bool first = true;

  double remaining = dt;
  while (remaining > 0.0) {
    frame.evaluate(out.R_hat, out.p_hat, e, C);
    if (first) {
      local.innovation_norm = e.norm();
      first = false;
    }
    const Mat6 M = frame.weighted_normal(C);
    const double rate =
        2.0 * frame.A.norm() + (1.0 + frame.k) * (out.P * M).norm();
    double h = (rate > 1e-12) ? kStepBudget / rate : remaining;
    h = std::min(h, remaining);
    if (++local.substeps > kMaxSubsteps) {
      throw std::runtime_error("observer_step: correction flow needs too many substeps");
    }

    // Coupled RK4 over (θ, p̂, P) with this substep's frozen geometry: the
    // rotation correction accumulates as a rotation vector θ applied at the
    // substep boundary.
    struct Stage {
      Vec3 dtheta;
      Vec3 dp;
      Mat6 dP;
    };
    const auto rhs = [&](const Vec3& p_stage, const Mat6& P_stage) -> Stage {
      VecX e_stage(e.size());
      for (int b = 0; b < model.blocks(); ++b) {
        const Mat3 pi = model.C2.middleRows<3>(3 * b);
        e_stage.segment<3>(3 * b) =
            e.segment<3>(3 * b) + pi * (out.p_hat - p_stage);
      }
      const VecX we = frame.weighted(e_stage);
      const Eigen::Matrix<double, 6, 1> corr = frame.k * (P_stage * (C.transpose() * we));
      return {corr.head<3>(), corr.tail<3>(), cre_derivative(P_stage, frame.A, M, frame.V)};
    };

    const Stage k1 = rhs(out.p_hat, out.P);
    const Stage k2 = rhs(out.p_hat + 0.5 * h * k1.dp, Mat6(out.P + 0.5 * h * k1.dP));
    const Stage k3 = rhs(out.p_hat + 0.5 * h * k2.dp, Mat6(out.P + 0.5 * h * k2.dP));
    const Stage k4 = rhs(out.p_hat + h * k3.dp, Mat6(out.P + h * k3.dP));

    const Vec3 theta =
        (h / 6.0) * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
    out.p_hat += (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    out.P += (h / 6.0) * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    if (theta.squaredNorm() > 0.0) {
      out.R_hat = integrate_rotation(out.R_hat, theta, 1.0);
    }
    local.clamped = detail::enforce_pd(out.P, kPdFloor) || local.clamped;
    remaining -= h;
  }

  if (info != nullptr) {
    const Eigen::SelfAdjointEigenSolver<Mat6> es(out.P, Eigen::EigenvaluesOnly);
    local.min_eig_P = es.eigenvalues().minCoeff();
    *info = local;
  }
  return out;
}

// Angular-velocity estimation error ω̃ = ω - R̃ᵀω̂ with R̃ = R̂ᵀR; zero when
// the corrected rate matches truth under the orientation error.
inline Vec3 angular_velocity_error(const Vec3& omega_true, const Vec3& omega_hat,
                                   const Rotation& r_tilde) {
  return omega_true - r_tilde.transposed() * omega_hat;
}

// Estimation errors against ground truth; the rotation error angle is
// 2·asin(|λ|) of the canonical error quaternion.
inline ErrorDiagnostics diagnostics(const ObserverState& state, const AgentState& truth) {
  ErrorDiagnostics d;
  const UnitQuaternion q = quat_from_rotation(error_rotation(state.R_hat, truth.pose.R));
  d.lambda = q.vec;
  d.p_err_body = truth.pose.p - state.p_hat;
  d.p_err_inertial = truth.pose.inertial_position() - state.R_hat * state.p_hat;
  d.x_err.head<3>() = 2.0 * d.lambda;
  d.x_err.tail<3>() = d.p_err_body;
  d.rotation_angle = 2.0 * std::asin(std::min(1.0, d.lambda.norm()));
  return d;
}

}  // namespace cooploc
