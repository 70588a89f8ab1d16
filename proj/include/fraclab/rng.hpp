#pragma once

#include <cstdint>
#include <random>

#include "fraclab/geometry.hpp"

namespace fraclab {

// Deterministic random source. mt19937_64 has a standardized sequence, and the
// uniform draw below is written out by hand because std::uniform_real_distribution
// is implementation-defined; reports must reproduce byte for byte from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * unit(); }

  // Log-uniform magnitude in [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return lo * std::pow(hi / lo, unit());
  }

  double sign() { return unit() < 0.5 ? -1.0 : 1.0; }

  // Uniform direction on the unit sphere S^{n-1}.
  Point direction(int n) {
    if (n == 1) return {sign(), 0.0};
    double t = uniform(0.0, 2.0 * M_PI);
    return {std::cos(t), std::sin(t)};
  }

  // Uniform point in a ball (exact radial inversion, no rejection).
  Point in_ball(const Ball& b, int n) {
    double r = b.radius * std::pow(unit(), 1.0 / n);
    Point u = direction(n);
    return add(b.center, scale(u, r));
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fraclab
