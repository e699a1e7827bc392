#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "cooploc/rng.hpp"

using namespace cooploc;

TEST_CASE("philox core matches reference vectors") {
  // Expected outputs computed with an independent implementation of the
  // 10-round philox4x32 function.
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;

  REQUIRE(detail::philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  REQUIRE(detail::philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                A2{0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  REQUIRE(detail::philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                A2{0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams with identical coordinates reproduce identical draws") {
  RandomStream a(42, NoiseDomain::Bearing, 3, 100, 7);
  RandomStream b(42, NoiseDomain::Bearing, 3, 100, 7);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(a.uniform01() == b.uniform01());
  }
  RandomStream c(42, NoiseDomain::Bearing, 3, 100, 7);
  RandomStream d(42, NoiseDomain::Bearing, 3, 100, 7);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(c.gaussian() == d.gaussian());
  }
}

TEST_CASE("draws are independent of stream creation order") {
  RandomStream first(1, NoiseDomain::LinearVelocity, 4, 10);
  const double v_first = first.gaussian();
  // Interleave another stream's draws; the first stream is unaffected.
  RandomStream other(1, NoiseDomain::AngularVelocity, 4, 10);
  (void)other.gaussian();
  RandomStream again(1, NoiseDomain::LinearVelocity, 4, 10);
  REQUIRE(again.gaussian() == v_first);
}

TEST_CASE("distinct stream coordinates decorrelate") {
  RandomStream base(7, NoiseDomain::Bearing, 1, 1, 1);
  const double v = base.uniform01();
  REQUIRE(RandomStream(8, NoiseDomain::Bearing, 1, 1, 1).uniform01() != v);
  REQUIRE(RandomStream(7, NoiseDomain::LinearVelocity, 1, 1, 1).uniform01() != v);
  REQUIRE(RandomStream(7, NoiseDomain::Bearing, 2, 1, 1).uniform01() != v);
  REQUIRE(RandomStream(7, NoiseDomain::Bearing, 1, 2, 1).uniform01() != v);
  REQUIRE(RandomStream(7, NoiseDomain::Bearing, 1, 1, 2).uniform01() != v);
}

TEST_CASE("uniform draws stay in range with sane moments") {
  RandomStream s(123, NoiseDomain::Bearing, 1, 1);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean - 0.5) < 0.01);
  REQUIRE(std::abs(var - 1.0 / 12.0) < 0.005);

  RandomStream r(123, NoiseDomain::Bearing, 2, 1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-0.005, 0.005);
    REQUIRE(u >= -0.005);
    REQUIRE(u < 0.005);
  }
}

TEST_CASE("gaussian draws have standard moments") {
  RandomStream s(9, NoiseDomain::LinearVelocity, 1, 1);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.02);
  REQUIRE(std::abs(var - 1.0) < 0.02);

  RandomStream v(9, NoiseDomain::LinearVelocity, 2, 1);
  Vec3 acc = Vec3::Zero();
  Vec3 acc2 = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3 g = v.gaussian3(0.1);
    acc += g;
    acc2 += g.cwiseProduct(g);
  }
  for (int k = 0; k < 3; ++k) {
    REQUIRE(std::abs(acc[k] / n) < 0.002);
    REQUIRE(std::abs(acc2[k] / n - 0.01) < 0.001);
  }
}
