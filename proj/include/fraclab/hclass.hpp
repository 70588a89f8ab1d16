#pragma once

// The sup-over-balls weight-pair functional in its three forms.
//
// For a pair (w, v_1..v_m), exponents p_i, and a ball B with center x_B and
// scale L = |B|^{1/n}, the full per-ball quantity is
//
//     sup_B(w) / |B|^{(delta-1)/n} * prod_i F_i,
//
//     F_i = ( int_{R^n} v_i^{-p_i'}(y) (L + |x_B - y|)^{-theta_i p_i'} dy )^{1/p_i'},
//     theta_i = n - gamma_i + 1/m,
//
// where a p_i = 1 factor degenerates to the essential sup of
// v_i^{-1}(y) (L + |x_B - y|)^{-theta_i} over the whole space. The local form
// keeps only the ball part of each factor (and drops the kernel); the global
// form keeps only the complement with the bare kernel |x_B - y|^{-theta_i}.
//
// The supremum over "every ball" is certified on a SamplePlan family only;
// every report carries the argmax ball and a stability figure from a doubled
// plan so the sampling nature of the estimate stays visible.
//
// For pure power weights the factor convergence questions are settled
// analytically before any quadrature runs, and the per-ball value at
// origin-centered balls is an exact power of R whose exponent power_h_slope
// returns in closed form.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclab/exponents.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/params.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/sample_plan.hpp"
#include "fraclab/weights.hpp"

namespace fraclab {

struct WeightPair {
  WeightSpec w{ConstantW{1.0}};
  std::vector<WeightSpec> vvec;
};

struct HBallDiag {
  double value = 0.0;       // full per-ball product, possibly +inf
  double wsup = 0.0;        // sup of w over B
  double prefactor = 0.0;   // wsup / |B|^{(delta-1)/n}
  std::vector<double> factors;
  int divergent_factor = -1;  // index of the first divergent factor, or -1
  bool overflowed = false;
};

struct HBallRow {
  Ball ball;
  double full = 0.0;
  double local = 0.0;
  double global = 0.0;
};

struct HReport {
  std::vector<HBallRow> per_ball;
  double sup_full = 0.0, sup_local = 0.0, sup_global = 0.0;
  Ball argmax_full{}, argmax_local{}, argmax_global{};
  std::optional<Ball> divergence_witness;  // present iff some tabulated value is inf
  std::optional<double> slope_diag;        // log-log fit at origin-centered balls
  // Ratios of the full value at the extreme origin-centered radii against the
  // radius nearest 1; they expose R -> 0 / R -> infinity blow-up even when
  // every individual ball value is finite.
  double shrink_blowup_ratio = std::numeric_limits<double>::quiet_NaN();
  double growth_blowup_ratio = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> stability;  // |sup_full(doubled plan) / sup_full - 1|
  int balls_tested = 0;
};

namespace hclass_detail {

// Exponent of a pure radial power (Constant counts as exponent 0); nullopt
// for shapes with no single power behaviour.
inline std::optional<double> pure_power_exponent(const WeightSpec& s) {
  if (const auto* p = std::get_if<PowerW>(&s)) return p->alpha;
  if (std::get_if<ConstantW>(&s)) return 0.0;
  return std::nullopt;
}

// Analytic convergence verdict for one factor with v = |x|^beta. Returns an
// empty string when the factor is finite, otherwise the failing condition.
// `origin_involved` is false when the integration region excludes the origin.
inline std::string power_factor_failure(double beta, double theta, const Exponent& p, int n,
                                        bool origin_involved, bool tail_involved) {
  if (p == Exponent(1.0)) {
    if (origin_involved && beta > 0.0)
      return "sup factor unbounded at the origin (beta > 0)";
    if (tail_involved && beta + theta < 0.0)
      return "sup factor unbounded at infinity (beta + theta < 0)";
    return {};
  }
  double pp = holder_conjugate(p).value();
  if (origin_involved && beta * pp >= static_cast<double>(n))
    return "integral factor non-integrable at the origin (beta p' >= n)";
  if (tail_involved && (beta + theta) * pp <= static_cast<double>(n))
    return "integral factor non-integrable at infinity ((beta + theta) p' <= n)";
  return {};
}

// Integrand v^{-s} (y) * (L + |x_B - y|)^{-kexp}, with L = 0 meaning the bare
// kernel |x_B - y|^{-kexp}.
inline Integrand factor_integrand(const WeightSpec& v, double s, const Point& xB, double L,
                                  double kexp, int n) {
  WeightSpec neg = weight_pow(v, -s);
  Integrand g;
  g.eval = [neg, xB, L, kexp, n](const Point& y) {
    double base = L + dist(xB, y, n);
    double w = weight_eval(neg, y, n);
    if (w == 0.0) return 0.0;
    return w * std::pow(base, -kexp);
  };
  if (weight_origin_singular(neg)) g.singular_points.push_back(kOrigin);
  if (L == 0.0) g.singular_points.push_back(xB);
  g.decay_exponent = kexp - radial_growth_exponent(neg);
  for (double r : weight_break_radii(neg)) g.break_circles.push_back({kOrigin, r});
  return g;
}

inline SamplePlan sup_probe_plan() {
  SamplePlan sp;
  sp.points_per_set = 1024;
  return sp;
}

// Ball comfortably enclosing both B and the origin, splitting the whole-space
// integrals into a near part and a decaying far part.
inline Ball enclosing_ball(const Ball& b, int n) {
  double r = 4.0 * (b.radius + norm(b.center, n));
  return Ball{b.center, std::max(r, 4.0 * b.radius)};
}

struct FactorOut {
  double value = 0.0;
  bool diverged = false;
  bool overflowed = false;
};

// One full-form factor: integral over the whole space (or sup for p = 1).
inline FactorOut full_factor(const WeightSpec& v, const Exponent& p, double theta,
                             const Ball& ball, int n, double tol) {
  FactorOut out;
  double L = ball_scale(ball, n);
  Ball enc = enclosing_ball(ball, n);
  if (auto beta = pure_power_exponent(v)) {
    std::string fail = power_factor_failure(*beta, theta, p, n, true, true);
    if (!fail.empty()) {
      out.diverged = true;
      out.value = kInf;
      return out;
    }
  }
  if (p == Exponent(1.0)) {
    Integrand g = factor_integrand(v, 1.0, ball.center, L, theta, n);
    SamplePlan sp = sup_probe_plan();
    double near = ess_sup(g, Region{enc, false}, n, sp);
    double far = ess_sup(g, Region{enc, true}, n, sp);
    out.value = std::max(near, far);
    if (std::isinf(out.value)) out.diverged = true;
    return out;
  }
  double pp = holder_conjugate(p).value();
  Integrand g = factor_integrand(v, pp, ball.center, L, theta * pp, n);
  QuadResult in = integrate_ball(g, enc, n, tol);
  QuadResult far = integrate_complement(g, enc, n, tol);
  out.diverged = in.diverged || far.diverged;
  out.overflowed = in.overflowed || far.overflowed;
  if (out.diverged || out.overflowed) {
    out.value = kInf;
    return out;
  }
  out.value = std::pow(in.value + far.value, 1.0 / pp);
  return out;
}

inline std::optional<double> fit_loglog_slope(const std::vector<std::pair<double, double>>& rv) {
  if (rv.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [r, v] : rv) {
    if (!(r > 0.0) || !(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    double x = std::log(r), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double k = static_cast<double>(rv.size());
  double den = k * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (k * sxy - sx * sy) / den;
}

}  // namespace hclass_detail

inline void validate_pair(const WeightPair& pair, const Params& q) {
  if (pair.vvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("weight pair has wrong number of v components");
  validate_weight(pair.w);
  for (const auto& v : pair.vvec) validate_weight(v);
}

inline HBallDiag h_ball_diagnostics(const WeightPair& pair, const Params& q, const Ball& ball,
                                    double tol = 1e-6) {
  validate(q);
  validate_pair(pair, q);
  HBallDiag diag;
  diag.wsup = weight_sup_on_ball(pair.w, ball, q.n);
  diag.prefactor = diag.wsup / ball_measure_pow(ball, q.n, (q.delta - 1.0) / q.n);
  diag.value = diag.prefactor;
  for (int i = 0; i < q.m; ++i) {
    hclass_detail::FactorOut f = hclass_detail::full_factor(
        pair.vvec[i], q.pvec[i], theta_i(q, i), ball, q.n, tol);
    diag.factors.push_back(f.value);
    diag.overflowed |= f.overflowed;
    if ((f.diverged || std::isinf(f.value)) && diag.divergent_factor < 0)
      diag.divergent_factor = i;
    diag.value *= f.value;
  }
  if (diag.divergent_factor >= 0) diag.value = kInf;
  return diag;
}

inline double h_ball_value(const WeightPair& pair, const Params& q, const Ball& ball,
                           double tol = 1e-6) {
  return h_ball_diagnostics(pair, q, ball, tol).value;
}

inline double local_condition_value(const WeightPair& pair, const Params& q, const Ball& ball,
                                    double tol = 1e-6) {
  validate(q);
  validate_pair(pair, q);
  double ex = q.delta / q.n - q.gamma / q.n + inv_p(q);
  double value = weight_sup_on_ball(pair.w, ball, q.n) / ball_measure_pow(ball, q.n, ex);
  double vol = ball_volume(ball, q.n);
  bool origin_inside = norm(ball.center, q.n) <= ball.radius;
  for (int i = 0; i < q.m; ++i) {
    const WeightSpec& v = pair.vvec[i];
    if (q.pvec[i] == Exponent(1.0)) {
      value *= weight_sup_on_ball(weight_pow(v, -1.0), ball, q.n);
      continue;
    }
    double pp = holder_conjugate(q.pvec[i]).value();
    if (auto beta = hclass_detail::pure_power_exponent(v)) {
      if (origin_inside && *beta * pp >= static_cast<double>(q.n)) return kInf;
    }
    QuadResult qr = integrate_ball(weight_integrand(weight_pow(v, -pp), q.n), ball, q.n, tol);
    if (qr.diverged || qr.overflowed) return kInf;
    value *= std::pow(qr.value / vol, 1.0 / pp);
  }
  return value;
}

inline double global_condition_value(const WeightPair& pair, const Params& q, const Ball& ball,
                                     double tol = 1e-6) {
  validate(q);
  validate_pair(pair, q);
  double value = weight_sup_on_ball(pair.w, ball, q.n) /
                 ball_measure_pow(ball, q.n, (q.delta - 1.0) / q.n);
  bool origin_outside = norm(ball.center, q.n) > ball.radius;
  for (int i = 0; i < q.m; ++i) {
    const WeightSpec& v = pair.vvec[i];
    double theta = theta_i(q, i);
    if (auto beta = hclass_detail::pure_power_exponent(v)) {
      std::string fail =
          hclass_detail::power_factor_failure(*beta, theta, q.pvec[i], q.n, origin_outside, true);
      if (!fail.empty()) return kInf;
    }
    if (q.pvec[i] == Exponent(1.0)) {
      Integrand g = hclass_detail::factor_integrand(v, 1.0, ball.center, 0.0, theta, q.n);
      SamplePlan sp = hclass_detail::sup_probe_plan();
      double s = ess_sup(g, Region{ball, true}, q.n, sp);
      if (std::isinf(s)) return kInf;
      value *= s;
      continue;
    }
    double pp = holder_conjugate(q.pvec[i]).value();
    Integrand g = hclass_detail::factor_integrand(v, pp, ball.center, 0.0, theta * pp, q.n);
    QuadResult qr = integrate_complement(g, ball, q.n, tol);
    if (qr.diverged || qr.overflowed) return kInf;
    value *= std::pow(qr.value, 1.0 / pp);
  }
  return value;
}

// Closed-form dilation exponent: for w = |x|^alpha, v_i = |x|^{beta_i} with
// every factor convergent, the full per-ball value at B(0, R) is
// proportional to R^s with s = alpha - sum(beta_i) + gamma - n/p - delta.
inline double power_h_slope(const WeightPair& pair, const Params& q) {
  validate(q);
  validate_pair(pair, q);
  auto alpha = hclass_detail::pure_power_exponent(pair.w);
  if (!alpha) throw std::invalid_argument("power_h_slope needs a pure power w");
  if (*alpha < 0.0)
    throw std::invalid_argument("w unbounded at the origin (alpha < 0): sup factor diverges");
  double beta_sum = 0.0;
  for (int i = 0; i < q.m; ++i) {
    auto beta = hclass_detail::pure_power_exponent(pair.vvec[i]);
    if (!beta) throw std::invalid_argument("power_h_slope needs pure power v components");
    std::string fail =
        hclass_detail::power_factor_failure(*beta, theta_i(q, i), q.pvec[i], q.n, true, true);
    if (!fail.empty())
      throw std::invalid_argument("factor " + std::to_string(i + 1) + " diverges: " + fail);
    beta_sum += *beta;
  }
  return *alpha - beta_sum + q.gamma - n_over_p(q) - q.delta;
}

namespace hclass_detail {

struct SupTrack {
  double sup = 0.0;
  Ball arg{};
  bool any = false;
  void offer(double v, const Ball& b) {
    if (std::isnan(v)) return;
    if (!any || v > sup) {
      sup = v;
      arg = b;
      any = true;
    }
  }
};

inline void fill_origin_diagnostics(HReport& rep, const Params& q) {
  std::vector<std::pair<double, double>> origin_rows;
  for (const auto& row : rep.per_ball)
    if (norm(row.ball.center, q.n) == 0.0) origin_rows.emplace_back(row.ball.radius, row.full);
  if (origin_rows.empty()) return;
  rep.slope_diag = fit_loglog_slope(origin_rows);
  auto near_one = origin_rows.front();
  auto smallest = origin_rows.front();
  auto largest = origin_rows.front();
  for (const auto& pr : origin_rows) {
    if (std::abs(std::log(pr.first)) < std::abs(std::log(near_one.first))) near_one = pr;
    if (pr.first < smallest.first) smallest = pr;
    if (pr.first > largest.first) largest = pr;
  }
  if (near_one.second > 0.0 && std::isfinite(near_one.second)) {
    rep.shrink_blowup_ratio = smallest.second / near_one.second;
    rep.growth_blowup_ratio = largest.second / near_one.second;
  }
}

}  // namespace hclass_detail

inline HReport h_constant(const WeightPair& pair, const Params& q, const SamplePlan& plan,
                          double tol = 1e-6, bool with_stability = true) {
  validate(q);
  validate_pair(pair, q);
  HReport rep;
  hclass_detail::SupTrack full, local, global;
  for (const Ball& B : plan.balls(q.n)) {
    HBallRow row;
    row.ball = B;
    row.full = h_ball_value(pair, q, B, tol);
    row.local = local_condition_value(pair, q, B, tol);
    row.global = global_condition_value(pair, q, B, tol);
    full.offer(row.full, B);
    local.offer(row.local, B);
    global.offer(row.global, B);
    if (!rep.divergence_witness &&
        (std::isinf(row.full) || std::isinf(row.local) || std::isinf(row.global)))
      rep.divergence_witness = B;
    rep.per_ball.push_back(row);
  }
  rep.balls_tested = static_cast<int>(rep.per_ball.size());
  rep.sup_full = full.sup;
  rep.sup_local = local.sup;
  rep.sup_global = global.sup;
  rep.argmax_full = full.arg;
  rep.argmax_local = local.arg;
  rep.argmax_global = global.arg;
  hclass_detail::fill_origin_diagnostics(rep, q);
  if (with_stability && std::isfinite(rep.sup_full) && rep.sup_full > 0.0) {
    hclass_detail::SupTrack dbl;
    for (const Ball& B : plan.doubled().balls(q.n)) dbl.offer(h_ball_value(pair, q, B, tol), B);
    if (std::isfinite(dbl.sup)) rep.stability = std::abs(dbl.sup / rep.sup_full - 1.0);
  }
  return rep;
}

// ---- lemma experiments ----------------------------------------------------

struct Lemma21Report {
  std::vector<double> rh_inf_constants;   // one per i in I1, order of I1
  std::vector<double> doubling_constants; // one per i in I2, order of I2
  bool hypotheses_met = false;
  double sup_full = 0.0, sup_global = 0.0;
  double ratio_full_over_global = 0.0, ratio_global_over_full = 0.0;
  Ball argmax_full{}, argmax_global{};
  int balls_tested = 0;
};

inline Lemma21Report lemma_2_1_experiment(const WeightPair& pair, const Params& q,
                                          const SamplePlan& plan, double tol = 1e-6) {
  validate(q);
  validate_pair(pair, q);
  Lemma21Report rep;
  bool ok = true;
  for (int i : index_set_one(q)) {
    ConstantEstimate est = rh_constant(weight_pow(pair.vvec[i], -1.0), kInf, q.n, plan, tol);
    rep.rh_inf_constants.push_back(est.value);
    ok = ok && std::isfinite(est.value) && !est.diverged && !est.overflowed;
  }
  for (int i : index_set_gt_one(q)) {
    double pp = holder_conjugate(q.pvec[i]).value();
    ConstantEstimate est = doubling_constant(weight_pow(pair.vvec[i], -pp), q.n, plan, tol);
    rep.doubling_constants.push_back(est.value);
    ok = ok && std::isfinite(est.value) && !est.diverged && !est.overflowed;
  }
  rep.hypotheses_met = ok;
  if (!ok) return rep;
  HReport h = h_constant(pair, q, plan, tol, false);
  rep.sup_full = h.sup_full;
  rep.sup_global = h.sup_global;
  rep.argmax_full = h.argmax_full;
  rep.argmax_global = h.argmax_global;
  rep.balls_tested = h.balls_tested;
  rep.ratio_full_over_global = h.sup_full / h.sup_global;
  rep.ratio_global_over_full = h.sup_global / h.sup_full;
  return rep;
}

struct Lemma22Report {
  double tau = 0.0, delta = 0.0;
  double sup_local = 0.0, sup_global = 0.0;
  double ratio_global_over_local = 0.0;
  bool implication_holds = false;  // finite local sup came with finite global sup
  Ball argmax_local{}, argmax_global{};
  int balls_tested = 0;
};

inline Lemma22Report lemma_2_2_experiment(const WeightPair& pair, const Params& q,
                                          const SamplePlan& plan, double tol = 1e-6) {
  validate(q);
  validate_pair(pair, q);
  Lemma22Report rep;
  rep.tau = tau_threshold(q);
  rep.delta = q.delta;
  if (!(q.delta < rep.tau))
    throw std::domain_error("lemma 2.2 needs delta < tau; got delta >= tau");
  hclass_detail::SupTrack local, global;
  int count = 0;
  for (const Ball& B : plan.balls(q.n)) {
    local.offer(local_condition_value(pair, q, B, tol), B);
    global.offer(global_condition_value(pair, q, B, tol), B);
    ++count;
  }
  rep.sup_local = local.sup;
  rep.sup_global = global.sup;
  rep.argmax_local = local.arg;
  rep.argmax_global = global.arg;
  rep.balls_tested = count;
  rep.ratio_global_over_local = global.sup / local.sup;
  rep.implication_holds = !std::isfinite(rep.sup_local) || std::isfinite(rep.sup_global);
  return rep;
}

}  // namespace fraclab
