#pragma once

// End-to-end checks of the boundedness equivalence on concrete batteries.
//
// Forward direction: for a weight pair and a battery of test functions,
// the smoothness-space quotient of J f on each plan ball is compared with
// the product of the weighted input norms; their sup over the plan is the
// measured operator constant. The hypotheses of the equivalence (p > n/gamma
// and every v_i^{-p_i'} in RH_m) are estimated first; when they fail the
// computation is skipped and reported as such.
//
// Necessity direction: the per-ball lower-bound functional
//
//   ||w chi_B||_inf / |B|^{(delta-1)/n} * prod_i int f_i(y)
//       (|B|^{1/n} + |x_B - y|)^{-(n - gamma_i + 1/m)} dy
//
// must be dominated by the same norm product with one constant for every
// ball; the largest per-ball quotient over the plan is that constant.

#include <cmath>
#include <string>
#include <vector>

#include "fraclab/fractional_operator.hpp"
#include "fraclab/hclass.hpp"
#include "fraclab/lipschitz.hpp"
#include "fraclab/params.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/sample_plan.hpp"
#include "fraclab/weights.hpp"

namespace fraclab {

// Seeded battery of m smooth bumps with mixed centers, widths and heights.
inline std::vector<TestFunction> make_bump_battery(Rng& rng, int m, int n,
                                                   double reach = 3.0) {
  std::vector<TestFunction> fvec;
  for (int i = 0; i < m; ++i) {
    BumpF b;
    b.center = rng.in_ball(Ball{kOrigin, reach}, n);
    b.radius = rng.log_uniform(0.3, 2.0);
    b.height = rng.uniform(0.5, 2.0);
    fvec.push_back(b);
  }
  return fvec;
}

// Quotient of J f over one ball: ||w chi_B||_inf |B|^{-(1+delta/n)}
// int_B |J f - mean|, evaluated on the fixed oscillation grid.
inline double j_ball_quotient(const std::vector<TestFunction>& fvec, const Ball& ball,
                              const WeightSpec& w, const Params& q, double tol = 1e-5,
                              int panels = 2) {
  OscNodes nodes = oscillation_nodes(ball, q.n, panels);
  double shift = a_B(fvec, ball, q, tol);
  std::vector<double> vals;
  vals.reserve(nodes.pts.size());
  for (const auto& p : nodes.pts) vals.push_back(shift + eval_I(fvec, p, q, tol));
  return lip_ball_quotient_from_values(vals, nodes, ball, w, q.delta, q.n);
}

inline double norm_product(const std::vector<TestFunction>& fvec, const WeightPair& pair,
                           const Params& q, double tol = 1e-7) {
  double prod = 1.0;
  for (int i = 0; i < q.m; ++i)
    prod *= lp_norm_weighted(fvec[static_cast<std::size_t>(i)],
                             pair.vvec[static_cast<std::size_t>(i)],
                             q.pvec[static_cast<std::size_t>(i)], q.n, tol);
  return prod;
}

struct HypothesisReport {
  bool p_above_n_over_gamma = false;
  std::vector<double> rh_m_constants;  // one per slot, estimate for v_i^{-p_i'}
  bool met = false;
  std::string note;
};

inline HypothesisReport check_equivalence_hypotheses(const WeightPair& pair, const Params& q,
                                                     const SamplePlan& plan) {
  HypothesisReport rep;
  double p = aggregate_p(q.pvec);
  rep.p_above_n_over_gamma = p > q.n / q.gamma;
  if (!rep.p_above_n_over_gamma) rep.note = "aggregate p is not above n/gamma";
  SamplePlan small = plan;
  small.radii_count = std::min(plan.radii_count, 24);
  small.random_centers = std::min(plan.random_centers, 8);
  bool rh_ok = true;
  for (int i = 0; i < q.m; ++i) {
    const Exponent& pi = q.pvec[static_cast<std::size_t>(i)];
    if (q.m == 1) {
      // RH_1 holds for every weight; nothing to estimate in the linear case.
      rep.rh_m_constants.push_back(0.0);
      continue;
    }
    if (pi.value() == 1.0) {
      // p_i = 1 has no dual-power weight to test; the slot is vacuous here.
      rep.rh_m_constants.push_back(0.0);
      continue;
    }
    double pprime = 1.0 / (1.0 - pi.reciprocal());
    WeightSpec neg = weight_pow(pair.vvec[static_cast<std::size_t>(i)], -pprime);
    ConstantEstimate est = rh_constant(neg, static_cast<double>(q.m), q.n, small);
    rep.rh_m_constants.push_back(est.value);
    if (!std::isfinite(est.value)) rh_ok = false;
  }
  if (!rh_ok) {
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += "some v_i^{-p_i'} fails the RH_m estimate";
  }
  rep.met = rep.p_above_n_over_gamma && rh_ok;
  return rep;
}

struct BoundCheck {
  HypothesisReport hypotheses;
  bool skipped = false;
  double lhs_sup = 0.0;  // largest per-ball functional over the plan
  Ball argmax{};
  double norm_prod = 0.0;
  double ratio = 0.0;  // lhs_sup / norm_prod, the fitted constant
  int balls_tested = 0;
};

// Forward bound for one battery over the plan balls.
inline BoundCheck verify_forward_bound(const std::vector<TestFunction>& fvec,
                                       const WeightPair& pair, const Params& q,
                                       const SamplePlan& plan, double tol = 1e-5,
                                       int panels = 2) {
  validate_pair(pair, q);
  if (fvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("battery needs m component functions");
  BoundCheck out;
  out.hypotheses = check_equivalence_hypotheses(pair, q, plan);
  if (!out.hypotheses.met) {
    out.skipped = true;
    return out;
  }
  out.norm_prod = norm_product(fvec, pair, q, std::min(tol, 1e-6));
  for (const Ball& b : plan.balls(q.n)) {
    double lhs = j_ball_quotient(fvec, b, pair.w, q, tol, panels);
    ++out.balls_tested;
    if (lhs > out.lhs_sup) {
      out.lhs_sup = lhs;
      out.argmax = b;
    }
  }
  out.ratio = out.lhs_sup / out.norm_prod;
  return out;
}

// One factor of the necessity functional; the kernel offset keeps the
// integrand bounded, so only the support edge is marked.
inline double necessity_factor(const TestFunction& f, const Ball& ball, double theta, int n,
                               double tol) {
  Ball sup = test_support(f);
  double L = ball_scale(ball, n);
  Integrand g;
  g.eval = [&f, ball, L, theta, n](const Point& y) {
    double fv = test_eval(f, y, n);
    if (fv == 0.0) return 0.0;
    return fv * std::pow(L + dist(ball.center, y, n), -theta);
  };
  if (test_origin_singular(f, n)) g.singular_points.push_back(kOrigin);
  g.break_circles.push_back({sup.center, sup.radius});
  QuadResult qr = integrate_ball(g, sup, n, tol);
  return (qr.diverged || qr.overflowed) ? kInf : qr.value;
}

// Necessity bound for one battery: sup over plan balls of the displayed
// functional divided by the norm product.
inline BoundCheck verify_necessity_bound(const std::vector<TestFunction>& fvec,
                                         const WeightPair& pair, const Params& q,
                                         const SamplePlan& plan, double tol = 1e-6) {
  validate_pair(pair, q);
  if (fvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("battery needs m component functions");
  BoundCheck out;
  out.hypotheses.met = true;  // the lower bound needs no side hypotheses
  out.norm_prod = norm_product(fvec, pair, q, tol);
  for (const Ball& b : plan.balls(q.n)) {
    double val = weight_sup_on_ball(pair.w, b, q.n) /
                 ball_measure_pow(b, q.n, (q.delta - 1.0) / q.n);
    for (int i = 0; i < q.m; ++i)
      val *= necessity_factor(fvec[static_cast<std::size_t>(i)], b,
                              theta_i(q, i), q.n, tol);
    ++out.balls_tested;
    if (val > out.lhs_sup) {
      out.lhs_sup = val;
      out.argmax = b;
    }
  }
  out.ratio = out.lhs_sup / out.norm_prod;
  return out;
}

}  // namespace fraclab
