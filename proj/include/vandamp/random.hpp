#pragma once

// Reproducible pseudo-random streams. Every random direction or offset in a
// scenario is derived from an explicit 64-bit seed through splitmix64, so the
// same config yields the same vectors on any platform.

#include "vandamp/core.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vandamp {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per pair, the sine branch discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::uint64_t state_;
};

/// Random direction with unit norm in the weighted inner product <v,w> = h * sum v_i w_i.
inline Vector random_unit_vector(SplitMix64& rng, Eigen::Index n, double mass_weight = 1.0) {
  Vector v = rng.normal_vector(n);
  double norm = std::sqrt(mass_weight * v.squaredNorm());
  while (norm == 0.0) {
    v = rng.normal_vector(n);
    norm = std::sqrt(mass_weight * v.squaredNorm());
  }
  return v / norm;
}

}  // namespace vandamp
