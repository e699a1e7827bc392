#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cooploc/geometry.hpp"

using namespace cooploc;

namespace {

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Rotation random_rotation(std::mt19937& rng) {
  std::uniform_real_distribution<double> ang(0.0, M_PI);
  return Rotation::from_axis_angle(random_unit(rng), ang(rng));
}

Vec3 random_vec(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

}  // namespace

TEST_CASE("skew matches the cross product") {
  REQUIRE((skew(Vec3(1, 0, 0)) * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() == 0.0);
  REQUIRE((skew(Vec3(2, -1, 3)) * Vec3(2, -1, 3)).norm() == 0.0);

  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  REQUIRE((skew(Vec3(0, 0, 1)) - expected).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(101);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 x = random_vec(rng, 10.0);
    const Vec3 y = random_vec(rng, 10.0);
    REQUIRE((skew(x) * y - x.cross(y)).norm() < 1e-12 * (1.0 + x.norm() * y.norm()));
    REQUIRE((skew(x) + skew(x).transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("projector annihilates its bearing and is an orthogonal projection") {
  const Mat3 p = projector(Vec3(1, 0, 0));
  REQUIRE((p - Vec3(0, 1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() == 0.0);

  const Vec3 g = Vec3(1, 1, 1).normalized();
  REQUIRE((projector(g) * g).norm() < 1e-15);

  std::mt19937 rng(102);
  for (int i = 0; i < 100; ++i) {
    const Mat3 pi = projector(random_unit(rng));
    REQUIRE((pi * pi - pi).cwiseAbs().maxCoeff() < 1e-14);
  }
  for (int i = 0; i < 10000; ++i) {
    const Vec3 y = random_unit(rng);
    const Mat3 pi = projector(y);
    REQUIRE((pi - pi.transpose()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((pi * pi - pi).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(std::abs(pi.trace() - 2.0) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Mat3> es(pi);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-12);
  }

  REQUIRE_THROWS_AS(projector(Vec3(1, 1, 0)), std::invalid_argument);
}

TEST_CASE("bearing construction normalizes and validates") {
  REQUIRE((Bearing(Vec3(3, 0, 0)).vector() - Vec3(1, 0, 0)).norm() == 0.0);
  REQUIRE_THROWS_AS(Bearing(Vec3(0, 0, 0)), std::invalid_argument);
  REQUIRE_THROWS_AS(Bearing::from_unit(Vec3(1, 1, 0)), std::invalid_argument);
}

TEST_CASE("quaternion extraction uses the canonical sign") {
  const UnitQuaternion qi = quat_from_rotation(Rotation::identity());
  REQUIRE(qi.w == 1.0);
  REQUIRE(qi.vec.norm() == 0.0);

  const UnitQuaternion qz = quat_from_rotation(Rotation::about_z(0.2));
  REQUIRE(std::abs(qz.w - std::cos(0.1)) < 1e-15);
  REQUIRE((qz.vec - Vec3(0, 0, std::sin(0.1))).norm() < 1e-15);

  std::mt19937 rng(103);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_rotation(rng);
    const Rotation back = rotation_from_quat(quat_from_rotation(r));
    REQUIRE((back.matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
  for (int i = 0; i < 10000; ++i) {
    const UnitQuaternion q = quat_from_rotation(random_rotation(rng));
    REQUIRE(q.w >= 0.0);
    REQUIRE(q.norm_error() < 1e-12);
  }
}

TEST_CASE("rotation from quaternion matches axis-angle forms") {
  REQUIRE((rotation_from_quat(UnitQuaternion::identity()).matrix() - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() == 0.0);

  const UnitQuaternion q_half =
      UnitQuaternion::from_components(std::cos(M_PI / 4), Vec3(0, 0, std::sin(M_PI / 4)));
  REQUIRE((rotation_from_quat(q_half).matrix() - Rotation::about_z(M_PI / 2).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-15);

  REQUIRE_THROWS_AS(rotation_from_quat(UnitQuaternion{0.9, Vec3(0.1, 0, 0)}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(UnitQuaternion::from_components(0.9, Vec3(0.1, 0, 0)), std::invalid_argument);
}

TEST_CASE("rotation linearizes as identity plus twice the skew of the vector part") {
  // |R - (I + 2S(λ))| should shrink quadratically with the quaternion scale.
  std::mt19937 rng(104);
  double prev_ratio = -1.0;
  for (const double eps : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Vec3 lambda = eps * random_unit(rng);
      const double w = std::sqrt(1.0 - lambda.squaredNorm());
      const Rotation r = rotation_from_quat(UnitQuaternion::from_components(w, lambda));
      const double resid =
          (r.matrix() - Mat3::Identity() - 2.0 * skew(lambda)).cwiseAbs().maxCoeff();
      worst = std::max(worst, resid / (eps * eps));
    }
    REQUIRE(worst < 4.0);
    if (prev_ratio > 0.0) {
      REQUIRE(worst < 4.0 * prev_ratio + 1e-6);
    }
    prev_ratio = worst;
  }
}

TEST_CASE("error rotation composes back to the truth") {
  std::mt19937 rng(105);
  const Rotation r = random_rotation(rng);
  REQUIRE((error_rotation(r, r).matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  const Rotation rz = Rotation::about_z(0.7);
  REQUIRE((error_rotation(Rotation::identity(), rz).matrix() - rz.matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);

  for (int i = 0; i < 100; ++i) {
    const Rotation r_hat = random_rotation(rng);
    const Rotation truth = random_rotation(rng);
    const Rotation composed = r_hat * error_rotation(r_hat, truth);
    REQUIRE((composed.matrix() - truth.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rotation integration is the exact exponential") {
  REQUIRE((integrate_rotation(Rotation::identity(), Vec3::Zero(), 0.01).matrix() -
           Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);

  const Rotation half_turn = integrate_rotation(Rotation::identity(), Vec3(0, 0, M_PI), 1.0);
  REQUIRE((half_turn.matrix() - Rotation::about_z(M_PI).matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const Vec3 omega(0.3, -0.2, 0.5);
  Rotation stepped = Rotation::identity();
  for (int i = 0; i < 1000; ++i) {
    stepped = integrate_rotation(stepped, omega, 1e-3);
  }
  const Rotation direct = Rotation::exp(omega);
  REQUIRE((stepped.matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("orthonormality does not drift over a million integration steps") {
  std::mt19937 rng(106);
  Rotation r = random_rotation(rng);
  const double dt = 1e-3;
  for (int k = 0; k < 1000000; ++k) {
    const Vec3 omega(0.3 * std::sin(1e-3 * k), 0.2, -0.4 * std::cos(2e-3 * k));
    r = integrate_rotation(r, omega, dt);
    if (k % 100000 == 0) REQUIRE(r.orthonormality_error() < 1e-9);
  }
  REQUIRE(r.orthonormality_error() < 1e-9);
}

TEST_CASE("quaternion vector-part derivative under a constant body rate") {
  // λ̇ = ½λ̊ω̃ + ½S(λ)ω̃ for R̃(t) = R̃(0)·Exp(S(ω̃ t)), checked against a
  // central finite difference.
  const Vec3 omega_t(0.4, -0.3, 0.7);
  const Rotation r0 = Rotation::from_axis_angle(Vec3(1, 2, -1), 0.8);
  const double h = 1e-4;

  const auto lambda_at = [&](double t) {
    const Rotation rt = r0 * Rotation::exp(omega_t * t);
    return quat_from_rotation(rt).vec;
  };
  const Vec3 lambda_dot_fd = (lambda_at(h) - lambda_at(-h)) / (2.0 * h);

  const UnitQuaternion q0 = quat_from_rotation(r0);
  const Vec3 lambda_dot = 0.5 * q0.w * omega_t + 0.5 * skew(q0.vec) * omega_t;
  REQUIRE((lambda_dot_fd - lambda_dot).norm() / lambda_dot.norm() < 1e-3);
}

TEST_CASE("first-order error-attitude dynamics hold down to small scales") {
  // For small attitude error λ and small rate mismatch ω̃ = ω - ω̂ the vector
  // part satisfies 2λ̇ = -S(ω)·2λ + ω̃ up to terms of order |λ||ω̃| + |λ|²;
  // the constant in that bound must not blow up as the scales shrink.
  std::mt19937 rng(107);
  const double h = 1e-5;
  std::vector<double> worst_by_scale;
  for (const double scale : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec3 lambda0 = scale * random_unit(rng);
      const Vec3 omega_mismatch = scale * random_unit(rng);
      const Vec3 omega = random_vec(rng, 1.0);
      const Vec3 omega_hat = omega - omega_mismatch;

      const Rotation r_hat0 = random_rotation(rng);
      const Rotation r_tilde0 = rotation_from_quat(
          UnitQuaternion::from_components(std::sqrt(1.0 - lambda0.squaredNorm()), lambda0));
      const Rotation r0 = r_hat0 * r_tilde0;

      const auto lambda_at = [&](double t) {
        const Rotation r_hat = r_hat0 * Rotation::exp(omega_hat * t);
        const Rotation r = r0 * Rotation::exp(omega * t);
        return quat_from_rotation(error_rotation(r_hat, r)).vec;
      };
      const Vec3 two_lambda_dot = (lambda_at(h) - lambda_at(-h)) / h;  // d(2λ)/dt
      const Vec3 residual = two_lambda_dot + skew(omega) * (2.0 * lambda0) - omega_mismatch;
      const double bound = lambda0.norm() * omega_mismatch.norm() + lambda0.squaredNorm();
      worst = std::max(worst, residual.norm() / bound);
    }
    REQUIRE(worst < 10.0);
    worst_by_scale.push_back(worst);
  }
  const auto [lo, hi] = std::minmax_element(worst_by_scale.begin(), worst_by_scale.end());
  REQUIRE(*hi / *lo < 8.0);
}
