#pragma once

// The multilinear fractional integral and its normalized companion.
//
//   I f(x)   = int prod_i f_i(y_i) * (sum_i |x - y_i|)^{gamma - mn} dy
//   J f(x)   = a_B + I f(x)
//
// a_B is the whole-space correction constant attached to a ball B: the two
// kernel terms are masked outside (2B)^m and B(0,1)^m respectively, which
// keeps both of them bounded (a masked term is active only when some
// coordinate sits at distance >= 2R, resp. >= 1, from the kernel pole).
//
// Everything is evaluated by iterated one-dimensional (or polar, for n = 2)
// quadrature over the product of the compact supports, with the kernel's
// diagonal trace at y_i = x handed to the engine as a singular point at every
// level. Desk scale only: m * n <= 4.
//
// The module also carries the geometric sets used by the lower-bound
// argument: the quadrant A anchored at x_B and the two quadrant-cut balls
// C1, C2 below and to the left of it, together with seeded samplers and the
// normalized kernel-difference ratio that is positive on A^m x C1 x C2.

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/params.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/weights.hpp"

namespace fraclab {

// ---- test functions -------------------------------------------------------

struct BumpF {
  Point center{0.0, 0.0};
  double radius = 1.0;
  double height = 1.0;  // peak value at the center
};
struct IndicatorF {
  Ball ball{};
};
struct PowerCutoffF {
  double beta = 0.0;  // |y|^beta inside the ball, 0 outside
  Ball ball{};
};
struct TabulatedF {
  std::vector<Point> pts;
  std::vector<double> vals;  // nonnegative; nearest-sample evaluation
  Ball support{};
};

using TestFunction = std::variant<BumpF, IndicatorF, PowerCutoffF, TabulatedF>;

inline double test_eval(const TestFunction& f, const Point& y, int n) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, BumpF>) {
          double t = dist(y, g.center, n) / g.radius;
          if (t >= 1.0) return 0.0;
          return g.height * std::exp(1.0 - 1.0 / (1.0 - t * t));
        } else if constexpr (std::is_same_v<T, IndicatorF>) {
          return contains(g.ball, y, n) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, PowerCutoffF>) {
          if (!contains(g.ball, y, n)) return 0.0;
          double r = norm(y, n);
          if (r == 0.0) return g.beta > 0 ? 0.0 : (g.beta == 0.0 ? 1.0 : kInf);
          return std::pow(r, g.beta);
        } else {
          if (!contains(g.support, y, n) || g.pts.empty()) return 0.0;
          std::size_t best = 0;
          double bd = kInf;
          for (std::size_t i = 0; i < g.pts.size(); ++i) {
            double d = dist(y, g.pts[i], n);
            if (d < bd) bd = d, best = i;
          }
          return g.vals[best];
        }
      },
      f);
}

inline Ball test_support(const TestFunction& f) {
  return std::visit(
      [](const auto& g) -> Ball {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, BumpF>) return Ball{g.center, g.radius};
        if constexpr (std::is_same_v<T, IndicatorF>) return g.ball;
        if constexpr (std::is_same_v<T, PowerCutoffF>) return g.ball;
        if constexpr (std::is_same_v<T, TabulatedF>) return g.support;
      },
      f);
}

// True when f itself blows up at the origin (negative-power cutoff with the
// origin in its support).
inline bool test_origin_singular(const TestFunction& f, int n) {
  if (const auto* p = std::get_if<PowerCutoffF>(&f))
    return p->beta < 0.0 && contains(p->ball, kOrigin, n);
  return false;
}

// CSV rows: one column per coordinate, then the value. Nearest-sample rule.
inline TestFunction load_test_function_csv(const std::string& path, int n) {
  check_dim(n);
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open test function csv: " + path);
  TabulatedF tab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(row, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() != static_cast<std::size_t>(n) + 1)
      throw std::invalid_argument("csv row needs n coordinates plus a value");
    Point p{cols[0], n == 2 ? cols[1] : 0.0};
    if (cols.back() < 0.0) throw std::invalid_argument("test function values must be >= 0");
    tab.pts.push_back(p);
    tab.vals.push_back(cols.back());
  }
  if (tab.pts.empty()) throw std::invalid_argument("csv holds no samples");
  Point lo = tab.pts[0], hi = tab.pts[0];
  for (const auto& p : tab.pts)
    for (int k = 0; k < 2; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  Ball support{Point{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}, 0.0};
  for (const auto& p : tab.pts)
    support.radius = std::max(support.radius, dist(p, support.center, n));
  support.radius = std::max(support.radius * 1.05, support.radius + 1e-12);
  tab.support = support;
  return tab;
}

// ---- kernel ---------------------------------------------------------------

inline double kernel_value(const Point& x, const std::vector<Point>& yvec, const Params& q) {
  double s = 0.0;
  for (const auto& y : yvec) s += dist(x, y, q.n);
  if (s == 0.0) return kInf;
  return std::pow(s, q.gamma - static_cast<double>(q.m) * q.n);
}

// ---- iterated evaluation --------------------------------------------------

namespace op_detail {

struct LevelOut {
  double val = 0.0;
  bool diverged = false;
};

// One level of the iterated integral for n = 1. `body(y, flags...)` is bound
// by the caller; here we only own the panel/shell structure of the level.
template <class G>
LevelOut integrate_level_1d(const G& g, const Ball& support, std::vector<double> sing,
                            std::vector<double> cuts, double rel_tol) {
  double a = support.center[0] - support.radius;
  double b = support.center[0] + support.radius;
  quad_detail::IntervalOut scout = quad_detail::integrate_interval(g, a, b, sing, cuts, 1e30);
  LevelOut out;
  if (scout.diverged || scout.saw_inf) {
    out.val = kInf;
    out.diverged = true;
    return out;
  }
  double abs_tol = rel_tol * std::max(std::abs(scout.val), 1e-12);
  quad_detail::IntervalOut fine = quad_detail::integrate_interval(g, a, b, sing, cuts, abs_tol);
  out.val = fine.val;
  out.diverged = fine.diverged || fine.saw_inf;
  if (out.diverged) out.val = kInf;
  return out;
}

template <class G>
LevelOut integrate_level_2d(const G& g, const Ball& support, std::vector<Point> sing,
                            std::vector<BreakCircle> circles, double rel_tol) {
  auto f2 = [&](const Point& y) { return g(y); };
  quad_detail::PlaneOut scout = quad_detail::disk_integral(f2, support, sing, circles, 1e30);
  LevelOut out;
  if (scout.diverged || scout.saw_inf) {
    out.val = kInf;
    out.diverged = true;
    return out;
  }
  double abs_tol = rel_tol * std::max(std::abs(scout.val), 1e-12);
  quad_detail::PlaneOut fine = quad_detail::disk_integral(f2, support, sing, circles, abs_tol);
  out.val = fine.val;
  out.diverged = fine.diverged || fine.saw_inf;
  if (out.diverged) out.val = kInf;
  return out;
}

}  // namespace op_detail

// I f(x). Divergence (possible only for out-of-range kernel exponents) comes
// back as +inf.
inline double eval_I(const std::vector<TestFunction>& fvec, const Point& x, const Params& q,
                     double tol = 1e-5) {
  validate(q);
  if (fvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("eval_I needs m component functions");
  if (q.m * q.n > 4) throw std::invalid_argument("eval_I is desk-scale only (m*n <= 4)");
  double kexp = q.gamma - static_cast<double>(q.m) * q.n;

  std::function<op_detail::LevelOut(int, double, double)> level =
      [&](int i, double d, double rel_tol) -> op_detail::LevelOut {
    const TestFunction& f = fvec[i];
    Ball sup = test_support(f);
    bool last = (i == q.m - 1);
    if (q.n == 1) {
      auto g = [&](double yc) -> double {
        Point y{yc, 0.0};
        double fv = test_eval(f, y, 1);
        if (fv == 0.0) return 0.0;
        double dd = d + std::abs(x[0] - yc);
        if (last) return fv * std::pow(dd, kexp);
        op_detail::LevelOut inner = level(i + 1, dd, rel_tol * 0.5);
        if (inner.diverged) return kInf;
        return fv * inner.val;
      };
      // With accumulated distance d > 0 the kernel trace at y = x is a mere
      // derivative kink, so it is a cut point rather than a shell target.
      std::vector<double> sing, cuts;
      (d == 0.0 ? sing : cuts).push_back(x[0]);
      if (test_origin_singular(f, 1)) sing.push_back(0.0);
      return op_detail::integrate_level_1d(g, sup, sing, cuts, rel_tol);
    }
    auto g = [&](const Point& y) -> double {
      double fv = test_eval(f, y, 2);
      if (fv == 0.0) return 0.0;
      double dd = d + dist(x, y, 2);
      if (last) return fv * std::pow(dd, kexp);
      op_detail::LevelOut inner = level(i + 1, dd, rel_tol * 0.5);
      if (inner.diverged) return kInf;
      return fv * inner.val;
    };
    // For d > 0 the kink at y = x sits on a single point that generic polar
    // rays never cross, so it needs no marker.
    std::vector<Point> sing;
    if (d == 0.0) sing.push_back(x);
    if (test_origin_singular(f, 2)) sing.push_back(kOrigin);
    return op_detail::integrate_level_2d(g, sup, sing, {}, rel_tol);
  };

  op_detail::LevelOut out = level(0, 0.0, tol);
  return out.diverged ? kInf : out.val;
}

// The correction constant of the J decomposition over a ball B: both kernel
// copies are masked off their singular product-balls ((2B)^m and B(0,1)^m),
// so the integrand is bounded and the integral runs over the supports only.
inline double a_B(const std::vector<TestFunction>& fvec, const Ball& ball, const Params& q,
                  double tol = 1e-5) {
  validate(q);
  if (fvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("a_B needs m component functions");
  if (q.m * q.n > 4) throw std::invalid_argument("a_B is desk-scale only (m*n <= 4)");
  double kexp = q.gamma - static_cast<double>(q.m) * q.n;
  const Point xB = ball.center;
  const double twoR = 2.0 * ball.radius;

  std::function<op_detail::LevelOut(int, double, double, bool, bool, double)> level =
      [&](int i, double d1, double d2, bool all_near, bool all_unit,
          double rel_tol) -> op_detail::LevelOut {
    const TestFunction& f = fvec[i];
    Ball sup = test_support(f);
    bool last = (i == q.m - 1);
    auto body = [&](const Point& y) -> double {
      double fv = test_eval(f, y, q.n);
      if (fv == 0.0) return 0.0;
      double r1 = dist(xB, y, q.n), r2 = norm(y, q.n);
      bool in_near = r1 <= twoR, in_unit = r2 <= 1.0;
      if (last) {
        double t1 = (all_near && in_near) ? 0.0 : std::pow(d1 + r1, kexp);
        double t2 = (all_unit && in_unit) ? 0.0 : std::pow(d2 + r2, kexp);
        return fv * (t1 - t2);
      }
      op_detail::LevelOut inner =
          level(i + 1, d1 + r1, d2 + r2, all_near && in_near, all_unit && in_unit, rel_tol * 0.5);
      if (inner.diverged) return kInf;
      return fv * inner.val;
    };
    if (q.n == 1) {
      auto g = [&](double yc) { return body(Point{yc, 0.0}); };
      // Mask edges and the two kernel kinks are cut points; nothing is
      // singular because the masks keep both kernels bounded.
      std::vector<double> cuts{xB[0] - twoR, xB[0] + twoR, -1.0, 1.0, xB[0], 0.0};
      return op_detail::integrate_level_1d(g, sup, {}, cuts, rel_tol);
    }
    std::vector<BreakCircle> circles{{xB, twoR}, {kOrigin, 1.0}};
    std::vector<Point> kinks{xB, kOrigin};
    return op_detail::integrate_level_2d(body, sup, kinks, circles, rel_tol);
  };

  op_detail::LevelOut out = level(0, 0.0, 0.0, true, true, tol);
  return out.diverged ? kInf : out.val;
}

inline double eval_J(const std::vector<TestFunction>& fvec, const Point& x, const Ball& ball,
                     const Params& q, double tol = 1e-5) {
  return a_B(fvec, ball, q, tol) + eval_I(fvec, x, q, tol);
}

// ---- geometric sets of the lower-bound argument ----------------------------

struct GeometrySets {
  Ball ball{};
  int n = 1;
  Ball c1_ball{}, c2_ball{};

  // A is the closed upper-right quadrant anchored at x_B.
  bool in_A(const Point& y) const {
    for (int k = 0; k < n; ++k)
      if (y[k] < ball.center[k]) return false;
    return true;
  }
  bool in_C1(const Point& y) const { return in_cut(y, c1_ball); }
  bool in_C2(const Point& y) const { return in_cut(y, c2_ball); }

  // Uniform samples: the quadrant cut through a ball's own center carries
  // exactly the reflected uniform law, so reflection replaces rejection.
  Point sample_C1(Rng& rng) const { return reflect_into(rng.in_ball(c1_ball, n), c1_ball); }
  Point sample_C2(Rng& rng) const { return reflect_into(rng.in_ball(c2_ball, n), c2_ball); }

  // A is unbounded: coordinates are drawn with log-uniform magnitudes in
  // [1e-3, spread] * R away from x_B.
  Point sample_A(Rng& rng, double spread = 10.0) const {
    Point y = ball.center;
    for (int k = 0; k < n; ++k) y[k] += ball.radius * rng.log_uniform(1e-3, spread);
    return y;
  }

  // Monte-Carlo measure of C1 or C2 (rejection count inside its ball).
  double measure_estimate(int which, Rng& rng, int samples = 20000) const {
    const Ball& cb = (which == 1) ? c1_ball : c2_ball;
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
      Point y = rng.in_ball(cb, n);
      bool in = true;
      for (int k = 0; k < n; ++k) in = in && y[k] <= cb.center[k];
      if (in) ++hits;
    }
    return ball_volume(cb, n) * static_cast<double>(hits) / samples;
  }

 private:
  bool in_cut(const Point& y, const Ball& cb) const {
    if (dist(y, cb.center, n) > cb.radius) return false;
    for (int k = 0; k < n; ++k)
      if (y[k] > cb.center[k]) return false;
    return true;
  }
  Point reflect_into(Point y, const Ball& cb) const {
    for (int k = 0; k < n; ++k)
      y[k] = cb.center[k] - std::abs(y[k] - cb.center[k]);
    return y;
  }
};

inline GeometrySets make_geometry(const Ball& ball, int n) {
  check_dim(n);
  GeometrySets gs;
  gs.ball = ball;
  gs.n = n;
  double rt = std::sqrt(static_cast<double>(n));
  double r1 = ball.radius / (12.0 * rt);
  double off2 = ball.radius / (3.0 * rt);
  Point c1 = ball.center, c2 = ball.center;
  for (int k = 0; k < n; ++k) {
    c1[k] -= r1;
    c2[k] -= off2;
  }
  gs.c1_ball = Ball{c1, r1};
  gs.c2_ball = Ball{c2, 2.0 * ball.radius / 3.0};
  return gs;
}

// Normalized kernel difference over admissible triples; the lower-bound
// lemma asserts this is >= C(n) > 0. Memberships are enforced, not assumed.
inline double kernel_diff_ratio(const GeometrySets& gs, const Point& x, const Point& z,
                                const std::vector<Point>& yvec, const Params& q) {
  if (!gs.in_C1(x)) throw std::invalid_argument("x is not in C1");
  if (!gs.in_C2(z)) throw std::invalid_argument("z is not in C2");
  for (const auto& y : yvec)
    if (!gs.in_A(y)) throw std::invalid_argument("some y_i is not in A");
  double num = kernel_value(x, yvec, q) - kernel_value(z, yvec, q);
  double L = ball_scale(gs.ball, q.n);
  double s = 0.0;
  for (const auto& y : yvec) s += dist(gs.ball.center, y, q.n);
  double den = L * std::pow(L + s, -(static_cast<double>(q.m) * q.n - q.gamma + 1.0));
  return num / den;
}

// ---- weighted Lebesgue norms ----------------------------------------------

inline double lp_norm_weighted(const TestFunction& f, const WeightSpec& v, const Exponent& p,
                               int n, double tol = 1e-7) {
  check_dim(n);
  validate_weight(v);
  Ball sup = test_support(f);
  if (p.is_inf()) {
    Integrand g;
    g.eval = [&f, v, n](const Point& y) {
      double fv = test_eval(f, y, n);
      return fv == 0.0 ? 0.0 : fv * weight_eval(v, y, n);
    };
    if (test_origin_singular(f, n) || weight_origin_singular(v))
      g.singular_points.push_back(kOrigin);
    SamplePlan sp;
    sp.points_per_set = 2048;
    return ess_sup(g, Region{sup, false}, n, sp);
  }
  double pv = p.value();
  Integrand g;
  g.eval = [&f, v, n, pv](const Point& y) {
    double fv = test_eval(f, y, n);
    if (fv == 0.0) return 0.0;
    return std::pow(fv * weight_eval(v, y, n), pv);
  };
  bool singular = test_origin_singular(f, n) || weight_origin_singular(v);
  if (singular && contains(sup, kOrigin, n)) g.singular_points.push_back(kOrigin);
  g.break_circles.push_back({sup.center, sup.radius});
  for (double r : weight_break_radii(v)) g.break_circles.push_back({kOrigin, r});
  QuadResult q = integrate_ball(g, sup, n, tol);
  if (q.diverged || q.overflowed) return kInf;
  return std::pow(q.value, 1.0 / pv);
}

}  // namespace fraclab
