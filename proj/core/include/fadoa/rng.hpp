#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace fadoa {

/// Seeded, splittable random stream (splitmix64 core).
///
/// Streams are derived by hashing a list of integer tags into the parent
/// state, so every (seed, trial, role) tuple names an independent stream
/// whose output does not depend on scheduling or on draws made from other
/// streams. Output is identical across platforms; no libc or libstdc++
/// distribution is involved.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  /// Child stream named by `ids`; order-sensitive.
  RandomStream derive(std::initializer_list<std::uint64_t> ids) const {
    std::uint64_t s = state_;
    for (std::uint64_t id : ids) s = mix(s ^ mix(id + kGamma));
    return RandomStream(s, Raw{});
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch).
  double gaussian() {
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  /// Circular complex normal CN(0, variance); one Box-Muller pair per draw.
  std::complex<double> complex_gaussian(double variance) {
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1) * variance);
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }

 private:
  struct Raw {};
  RandomStream(std::uint64_t state, Raw) : state_(state) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kTwoPi = 6.283185307179586476925;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace fadoa
