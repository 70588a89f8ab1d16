#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace fraclab {

// Points live in R^1 or R^2; the second coordinate is ignored when n = 1.
// The dimension travels alongside explicitly, which keeps the formulas close
// to how they are written on paper.
using Point = std::array<double, 2>;

inline constexpr Point kOrigin{0.0, 0.0};

inline void check_dim(int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
}

inline double norm(const Point& p, int n) {
  return n == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

inline double dist(const Point& a, const Point& b, int n) {
  return n == 1 ? std::abs(a[0] - b[0]) : std::hypot(a[0] - b[0], a[1] - b[1]);
}

inline Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point scale(const Point& a, double t) { return {a[0] * t, a[1] * t}; }

struct Ball {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

inline bool contains(const Ball& b, const Point& p, int n) {
  return dist(b.center, p, n) <= b.radius;
}

inline Ball dilate(const Ball& b, double factor) { return Ball{b.center, b.radius * factor}; }

// Volume of the unit ball: 2 on the line, pi in the plane.
inline double unit_ball_volume(int n) {
  check_dim(n);
  return n == 1 ? 2.0 : M_PI;
}

inline double ball_volume(const Ball& b, int n) {
  return unit_ball_volume(n) * std::pow(b.radius, n);
}

// |B|^e computed as omega_n^e * R^(n e). Going through the radius directly
// avoids squaring tiny or huge radii before the final power is taken.
inline double ball_measure_pow(const Ball& b, int n, double e) {
  return std::pow(unit_ball_volume(n), e) * std::pow(b.radius, n * e);
}

// |B|^{1/n}, the side-length scale that enters the smoothed kernels.
inline double ball_scale(const Ball& b, int n) {
  return std::pow(unit_ball_volume(n), 1.0 / n) * b.radius;
}

}  // namespace fraclab
