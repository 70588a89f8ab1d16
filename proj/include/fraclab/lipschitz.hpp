#pragma once

// Weighted Lipschitz seminorm machinery.
//
// The seminorm of a scalar field f against a weight w and smoothness order
// delta is
//
//   sup_B  ||w chi_B||_inf * |B|^{-(1 + delta/n)} * int_B |f - f_B|,
//
// with f_B the mean of f over B. Oscillations are computed in two passes
// over a fixed quadrature grid that depends only on the ball, never on f;
// that makes the mean subtraction kill additive constants to rounding and
// lets a caller reuse one set of expensive field evaluations for both
// passes.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/sample_plan.hpp"
#include "fraclab/weights.hpp"

namespace fraclab {

using FieldFn = std::function<double(const Point&)>;

// Quadrature nodes and weights over a ball; weights sum to the ball measure
// up to the grid's own accuracy (exactly for n = 1).
struct OscNodes {
  std::vector<Point> pts;
  std::vector<double> wts;
  double measure = 0.0;
};

inline OscNodes oscillation_nodes(const Ball& ball, int n, int panels = 4) {
  check_dim(n);
  if (panels < 1) throw std::invalid_argument("oscillation needs at least one panel");
  OscNodes nodes;
  if (n == 1) {
    double a = ball.center[0] - ball.radius;
    double width = 2.0 * ball.radius / panels;
    for (int p = 0; p < panels; ++p) {
      double lo = a + p * width;
      for (int k = 0; k < 15; ++k) {
        nodes.pts.push_back(Point{lo + quad_detail::kGkX[k] * width, 0.0});
        nodes.wts.push_back(quad_detail::kGkWK[k] * width);
      }
    }
  } else {
    int angles = 4 * panels;
    double dtheta = 2.0 * M_PI / angles;
    double width = ball.radius / panels;
    for (int a = 0; a < angles; ++a) {
      double theta = (a + 0.5) * dtheta;
      double cx = std::cos(theta), sx = std::sin(theta);
      for (int p = 0; p < panels; ++p) {
        double lo = p * width;
        for (int k = 0; k < 15; ++k) {
          double r = lo + quad_detail::kGkX[k] * width;
          nodes.pts.push_back(
              Point{ball.center[0] + r * cx, ball.center[1] + r * sx});
          nodes.wts.push_back(quad_detail::kGkWK[k] * width * r * dtheta);
        }
      }
    }
  }
  for (double w : nodes.wts) nodes.measure += w;
  return nodes;
}

// Mean oscillation (1/|B|) int_B |f - f_B| from precomputed node values.
inline double oscillation_from_values(const std::vector<double>& vals, const OscNodes& nodes) {
  if (vals.size() != nodes.wts.size())
    throw std::invalid_argument("oscillation values do not match the node grid");
  double mean = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) mean += nodes.wts[i] * vals[i];
  mean /= nodes.measure;
  double osc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    osc += nodes.wts[i] * std::abs(vals[i] - mean);
  return osc / nodes.measure;
}

inline double oscillation(const FieldFn& f, const Ball& ball, int n, int panels = 4) {
  OscNodes nodes = oscillation_nodes(ball, n, panels);
  std::vector<double> vals;
  vals.reserve(nodes.pts.size());
  for (const auto& p : nodes.pts) vals.push_back(f(p));
  return oscillation_from_values(vals, nodes);
}

// Symmetric two-point form (1/|B|^2) int_B int_B |f(x) - f(y)|; it brackets
// the mean oscillation between half and the whole of itself, which is what
// the cross-checks use.
inline double oscillation_two_point(const FieldFn& f, const Ball& ball, int n, int panels = 4) {
  OscNodes nodes = oscillation_nodes(ball, n, panels);
  std::vector<double> vals;
  vals.reserve(nodes.pts.size());
  for (const auto& p : nodes.pts) vals.push_back(f(p));
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < vals.size(); ++j)
      acc += nodes.wts[i] * nodes.wts[j] * std::abs(vals[i] - vals[j]);
  return acc / (nodes.measure * nodes.measure);
}

inline double lip_ball_quotient_from_values(const std::vector<double>& vals,
                                            const OscNodes& nodes, const Ball& ball,
                                            const WeightSpec& w, double delta, int n) {
  double osc = oscillation_from_values(vals, nodes);
  double wsup = weight_sup_on_ball(w, ball, n);
  return wsup * osc / ball_measure_pow(ball, n, delta / n);
}

// ||w chi_B||_inf * |B|^{-(1+delta/n)} * int_B |f - f_B|.
inline double lip_ball_quotient(const FieldFn& f, const Ball& ball, const WeightSpec& w,
                                double delta, int n, int panels = 4) {
  OscNodes nodes = oscillation_nodes(ball, n, panels);
  std::vector<double> vals;
  vals.reserve(nodes.pts.size());
  for (const auto& p : nodes.pts) vals.push_back(f(p));
  return lip_ball_quotient_from_values(vals, nodes, ball, w, delta, n);
}

struct LipReport {
  double value = 0.0;  // sup of the ball quotient over the plan
  Ball argmax{};
  int balls_tested = 0;
  // Relative change of the sup when the plan is doubled; NaN when skipped.
  double stability = std::numeric_limits<double>::quiet_NaN();
};

inline LipReport lip_seminorm(const FieldFn& f, const WeightSpec& w, double delta, int n,
                              const SamplePlan& plan, int panels = 4,
                              bool with_stability = true) {
  check_dim(n);
  validate_weight(w);
  auto sweep = [&](const SamplePlan& sp, Ball& arg, int& count) {
    double best = 0.0;
    for (const Ball& b : sp.balls(n)) {
      double q = lip_ball_quotient(f, b, w, delta, n, panels);
      ++count;
      if (q > best) {
        best = q;
        arg = b;
      }
    }
    return best;
  };
  LipReport rep;
  rep.value = sweep(plan, rep.argmax, rep.balls_tested);
  if (with_stability) {
    Ball arg2{};
    int cnt2 = 0;
    double v2 = sweep(plan.doubled(), arg2, cnt2);
    if (rep.value > 0.0) rep.stability = std::abs(v2 / rep.value - 1.0);
  }
  return rep;
}

}  // namespace fraclab
