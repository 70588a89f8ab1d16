#pragma once

#include <cstdint>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

// Where the sup-over-balls sweeps look. A plan is a generator: seed plus
// counts; the concrete radii and centers are materialized on demand so that a
// doubled plan regenerates deterministically from the same seed.
struct SamplePlan {
  std::uint64_t seed = 777001;
  int radii_count = 64;
  double r_min = 1e-3;
  double r_max = 1e3;
  int random_centers = 32;
  double center_reach = 1e3;  // |x_B| <= center_reach for the random centers
  int points_per_set = 4096;  // evaluation-grid budget for ess-sup estimates
  std::vector<Point> extra_centers{};  // e.g. knot radii of tabulated weights

  std::vector<double> radii() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(radii_count));
    if (radii_count == 1) {
      out.push_back(r_min);
      return out;
    }
    double lr = std::log(r_min), step = (std::log(r_max) - lr) / (radii_count - 1);
    for (int j = 0; j < radii_count; ++j) out.push_back(std::exp(lr + step * j));
    return out;
  }

  // Origin first, then seeded centers with log-uniform magnitude in
  // [r_min, center_reach] and uniform direction, then any extras.
  std::vector<Point> centers(int n) const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(1 + random_centers) + extra_centers.size());
    out.push_back(kOrigin);
    Rng rng(seed);
    for (int j = 0; j < random_centers; ++j) {
      double mag = rng.log_uniform(std::max(r_min, 1e-6), center_reach);
      out.push_back(scale(rng.direction(n), mag));
    }
    for (const auto& c : extra_centers) out.push_back(c);
    return out;
  }

  std::vector<Ball> balls(int n) const {
    std::vector<Ball> out;
    auto rs = radii();
    auto cs = centers(n);
    out.reserve(rs.size() * cs.size());
    for (const auto& c : cs)
      for (double r : rs) out.push_back(Ball{c, r});
    return out;
  }

  SamplePlan doubled() const {
    SamplePlan d = *this;
    d.radii_count *= 2;
    d.random_centers *= 2;
    return d;
  }
};

}  // namespace fraclab
