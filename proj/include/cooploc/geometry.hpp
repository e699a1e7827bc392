#pragma once

// Rigid-body geometry primitives: skew/projector operators, SO(3) with exact
// exponential integration, unit quaternions with a canonical sign, and unit
// bearing vectors.

#include <cmath>
#include <stdexcept>

#include "cooploc/types.hpp"

namespace cooploc {

// S(x) such that S(x)y = x × y.
inline Mat3 skew(const Vec3& x) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -x.z(),  x.y(),
         x.z(),    0.0, -x.x(),
        -x.y(),  x.x(),    0.0;
  // clang-format on
  return s;
}

// Rodrigues formula for Exp(S(w)); series fallback keeps small angles exact.
inline Mat3 so3_exp_matrix(const Vec3& w) {
  const double th2 = w.squaredNorm();
  const Mat3 s = skew(w);
  double a, b;
  if (th2 < 1e-16) {
    a = 1.0 - th2 / 6.0;
    b = 0.5 - th2 / 24.0;
  } else {
    const double th = std::sqrt(th2);
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  return Mat3::Identity() + a * s + b * (s * s);
}

// One Newton step of the polar correction R <- R(3I - RᵀR)/2, applied twice.
// Near-orthonormal input converges to machine precision.
inline Mat3 orthonormalized(const Mat3& m) {
  Mat3 r = m;
  for (int i = 0; i < 2; ++i) {
    r = 1.5 * r - 0.5 * r * (r.transpose() * r);
  }
  return r;
}

class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  // Validates orthonormality (|RᵀR - I|max <= 1e-9) and det = +1.
  static Rotation from_matrix(const Mat3& m) {
    const double ortho_err = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho_err <= kOrthoTol)) {
      throw std::invalid_argument("Rotation::from_matrix: matrix is not orthonormal");
    }
    if (!(std::abs(m.determinant() - 1.0) <= 1e-6)) {
      throw std::invalid_argument("Rotation::from_matrix: determinant is not +1");
    }
    return Rotation(m, Unchecked{});
  }

  // Caller guarantees orthonormality (products/exponentials of valid rotations).
  static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m, Unchecked{}); }

  static Rotation exp(const Vec3& w) { return Rotation(so3_exp_matrix(w), Unchecked{}); }

  static Rotation from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-12) throw std::invalid_argument("Rotation::from_axis_angle: zero axis");
    return exp(axis * (angle / n));
  }

  static Rotation about_z(double angle) { return exp(Vec3(0.0, 0.0, angle)); }

  const Mat3& matrix() const { return m_; }
  Rotation transposed() const { return Rotation(m_.transpose(), Unchecked{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, Unchecked{}); }

  double orthonormality_error() const {
    return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  }

  static constexpr double kOrthoTol = 1e-9;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

// Unit quaternion (w, vec) with canonical sign w >= 0, so the vector part is
// axis * sin(half-angle) with half-angle in [0, π/2].
struct UnitQuaternion {
  double w = 1.0;
  Vec3 vec = Vec3::Zero();

  static UnitQuaternion identity() { return UnitQuaternion{}; }

  // Accepts components within 1e-6 of unit norm, renormalizes, canonicalizes sign.
  static UnitQuaternion from_components(double w, const Vec3& v) {
    const double n = std::sqrt(w * w + v.squaredNorm());
    if (!(std::abs(n - 1.0) <= 1e-6)) {
      throw std::invalid_argument("UnitQuaternion: components are not unit norm");
    }
    UnitQuaternion q{w / n, v / n};
    if (q.w < 0.0) {
      q.w = -q.w;
      q.vec = -q.vec;
    }
    return q;
  }

  double norm_error() const { return std::abs(std::sqrt(w * w + vec.squaredNorm()) - 1.0); }
};

inline UnitQuaternion quat_from_rotation(const Rotation& r) {
  const Eigen::Quaterniond q(r.matrix());
  UnitQuaternion out{q.w(), q.vec()};
  if (out.w < 0.0) {
    out.w = -out.w;
    out.vec = -out.vec;
  }
  return out;
}

// R = I + 2S(λ)(λ̊I + S(λ)). Rejects non-unit input (norm deviation > 1e-6).
inline Rotation rotation_from_quat(const UnitQuaternion& q) {
  if (q.norm_error() > 1e-6) {
    throw std::invalid_argument("rotation_from_quat: quaternion is not unit norm");
  }
  const double n = std::sqrt(q.w * q.w + q.vec.squaredNorm());
  const double w = q.w / n;
  const Vec3 v = q.vec / n;
  const Mat3 s = skew(v);
  return Rotation::from_matrix_unchecked(Mat3::Identity() + 2.0 * s * (w * Mat3::Identity() + s));
}

// R̃ = R̂ᵀR; identity iff estimate matches truth.
inline Rotation error_rotation(const Rotation& r_hat, const Rotation& r) {
  return r_hat.transposed() * r;
}

// Exact exponential update R·Exp(S(ω dt)) followed by re-orthonormalization.
inline Rotation integrate_rotation(const Rotation& r, const Vec3& omega, double dt) {
  return Rotation::from_matrix_unchecked(orthonormalized(r.matrix() * so3_exp_matrix(omega * dt)));
}

// Unit bearing vector. The normalizing constructor requires a usefully long
// input; from_unit additionally checks the caller's claim of unit norm.
class Bearing {
 public:
  explicit Bearing(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 1e-12)) throw std::invalid_argument("Bearing: vector too short to normalize");
    g_ = v / n;
  }

  static Bearing from_unit(const Vec3& v) {
    if (std::abs(v.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("Bearing::from_unit: vector is not unit norm");
    }
    return Bearing(v);
  }

  const Vec3& vector() const { return g_; }

 private:
  Vec3 g_;
};

// Π_y = I - yyᵀ: orthogonal projector onto the plane normal to y.
inline Mat3 projector(const Bearing& b) {
  const Vec3& g = b.vector();
  return Mat3::Identity() - g * g.transpose();
}

// Raw-vector overload; rejects non-unit input (norm deviation > 1e-9).
inline Mat3 projector(const Vec3& y) {
  if (std::abs(y.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("projector: input is not unit norm");
  }
  return Mat3::Identity() - y * y.transpose();
}

}  // namespace cooploc
