#pragma once

// Observability Gramian over a time window for the linearized error system
// x = (2λ, p̃): ẋ = A(t)x, y = C(t)x, with A = blkdiag(-S(ω), -S(ω)) and the
// truth-evaluated output rows. A Gramian bounded away from zero over sliding
// windows is the condition for the Riccati gain to keep the error system
// exponentially stable; degenerate target geometry (e.g. all bearings
// collinear) shows up as a near-zero minimum eigenvalue.

#include <functional>
#include <stdexcept>
#include <vector>

#include "cooploc/geometry.hpp"
#include "cooploc/types.hpp"
#include "cooploc/world.hpp"

namespace cooploc {

// Output matrix a vehicle would see with perfect estimates everywhere: for
// each target j, rows [-Π_g S(Rᵀ p̄_j), Π_g] with g the true bearing.
inline MatX ideal_output_matrix(const Pose& observer, const std::vector<Vec3>& target_inertial) {
  const int n = static_cast<int>(target_inertial.size());
  MatX c = MatX::Zero(3 * n, 6);
  const Mat3 R_t = observer.R.matrix().transpose();
  for (int b = 0; b < n; ++b) {
    const Vec3 u = R_t * target_inertial[static_cast<std::size_t>(b)];
    const Bearing g(observer.p - u);
    const Mat3 pi = projector(g);
    c.block<3, 3>(3 * b, 0) = -pi * skew(u);
    c.block<3, 3>(3 * b, 3) = pi;
  }
  return c;
}

inline MatX ideal_output_matrix(const AgentState& truth,
                                const std::vector<Vec3>& target_inertial) {
  return ideal_output_matrix(truth.pose, target_inertial);
}

struct ObservabilityReport {
  double t0 = 0.0;
  double t1 = 0.0;
  Mat6 gramian = Mat6::Zero();
  double min_eigenvalue = 0.0;
  bool observable = false;
};

// W(t0, t1) = ∫ Φ(s,t0)ᵀ C(s)ᵀ C(s) Φ(s,t0) ds with Φ̇ = A Φ, both integrated
// jointly by RK4 at step dt (the last step is shortened to land on t1).
inline ObservabilityReport observability_gramian(const std::function<Mat6(double)>& A,
                                                 const std::function<MatX(double)>& C, double t0,
                                                 double t1, double dt, double threshold = 1e-6) {
  if (!(t1 > t0)) throw std::invalid_argument("observability_gramian: need t1 > t0");
  if (!(dt > 0.0)) throw std::invalid_argument("observability_gramian: dt must be positive");
  const int steps = std::max(1, static_cast<int>(std::llround((t1 - t0) / dt)));
  const double h = (t1 - t0) / steps;

  Mat6 phi = Mat6::Identity();
  Mat6 w = Mat6::Zero();
  struct Deriv {
    Mat6 dphi;
    Mat6 dw;
  };
  const auto rhs = [&](double t, const Mat6& phi_s) -> Deriv {
    const MatX c = C(t);
    return {A(t) * phi_s, phi_s.transpose() * (c.transpose() * c) * phi_s};
  };

  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const Deriv k1 = rhs(t, phi);
    const Deriv k2 = rhs(t + 0.5 * h, Mat6(phi + 0.5 * h * k1.dphi));
    const Deriv k3 = rhs(t + 0.5 * h, Mat6(phi + 0.5 * h * k2.dphi));
    const Deriv k4 = rhs(t + h, Mat6(phi + h * k3.dphi));
    w += (h / 6.0) * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    phi += (h / 6.0) * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
  }
  if (!w.allFinite()) {
    throw std::invalid_argument("observability_gramian: schedules produced non-finite values");
  }

  ObservabilityReport r;
  r.t0 = t0;
  r.t1 = t1;
  r.gramian = 0.5 * (w + w.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat6> es(r.gramian, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.observable = r.min_eigenvalue >= threshold;
  return r;
}

}  // namespace cooploc
