#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, domain, stream coordinates, draw index), so noise realizations are
// reproducible byte-for-byte and independent of evaluation order. std
// distributions are implementation-defined and would break that guarantee.

#include <array>
#include <cmath>
#include <cstdint>

#include "cooploc/types.hpp"

namespace cooploc {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
  constexpr std::uint64_t kM0 = 0xD2511F53ull;
  constexpr std::uint64_t kM1 = 0xCD9E8D57ull;
  const std::uint64_t p0 = kM0 * c[0];
  const std::uint64_t p1 = kM1 * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    philox_round(counter, key);
    key[0] += kW0;
    key[1] += kW1;
  }
  return counter;
}

}  // namespace detail

// Noise domains; part of the stream identity so channels never collide.
enum class NoiseDomain : std::uint32_t {
  LinearVelocity = 1,
  AngularVelocity = 2,
  Bearing = 3,
};

// One logical substream, e.g. (seed, Bearing, observer, step, target).
// Draws are sequential within the stream; streams are mutually independent.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, NoiseDomain domain, std::uint32_t a, std::uint32_t b,
               std::uint32_t c = 0)
      : key_{static_cast<std::uint32_t>(seed) + static_cast<std::uint32_t>(domain) * 0x85EBCA6Bu,
             static_cast<std::uint32_t>(seed >> 32) ^ static_cast<std::uint32_t>(domain)},
        base_{a, b, c, 0} {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    const std::uint64_t hi = next_word();
    const std::uint64_t lo = next_word();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (deterministic, unlike std::normal_distribution).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 gaussian3(double sigma) {
    return Vec3(sigma * gaussian(), sigma * gaussian(), sigma * gaussian());
  }

 private:
  std::uint32_t next_word() {
    if (word_index_ == 4) {
      word_index_ = 0;
      ++base_[3];
    }
    if (word_index_ == 0) {
      block_ = detail::philox4x32_10(base_, key_);
    }
    return block_[word_index_++];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::array<std::uint32_t, 4> block_{};
  int word_index_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cooploc
