#pragma once

// Weight descriptors and the class-constant estimators built on them.
//
// Every weight in the lab is radial, so a spec is a one-dimensional profile
// evaluated at |x|. The variants cover all shapes used by the example
// constructions: radial powers, constants, the exponential e^{|x|},
// inverse-polynomial decay (1+|x|^a)^{-k}, and tabulated profiles with
// log-log interpolation for everything that has no closed form.
//
// Radial powers additionally get exact ball integrals (antiderivatives for
// n = 1, the centered closed form for n = 2) together with the comparand
// R^n max{R, |x_B|}^alpha used in ratio diagnostics.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/sample_plan.hpp"

namespace fraclab {

struct PowerW {
  double alpha = 0.0;  // w(x) = |x|^alpha
};
struct ConstantW {
  double c = 1.0;  // w(x) = c > 0
};
struct ExpRadialW {
  double rate = 1.0;  // w(x) = e^{rate |x|}; the stock weight uses rate 1
};
struct InvPolyW {
  double alpha = 1.0;  // w(x) = (1 + |x|^alpha)^{-k}; alpha > 0
  double k = 1.0;      // negative k (growth) only arises from weight_pow
};
struct TabulatedW {
  std::vector<double> radii;   // strictly increasing, all > 0
  std::vector<double> values;  // same length, all > 0
  double tail_exponent = 0.0;  // w ~ values.back() (r / radii.back())^e beyond the grid
};

using WeightSpec = std::variant<PowerW, ConstantW, ExpRadialW, InvPolyW, TabulatedW>;

inline void validate_weight(const WeightSpec& spec) {
  if (const auto* c = std::get_if<ConstantW>(&spec)) {
    if (!(c->c > 0.0) || !std::isfinite(c->c))
      throw std::invalid_argument("constant weight must be positive");
  } else if (const auto* ip = std::get_if<InvPolyW>(&spec)) {
    if (!(ip->alpha > 0.0) || !std::isfinite(ip->alpha) || !std::isfinite(ip->k))
      throw std::invalid_argument("inv_poly weight needs alpha > 0 and finite k");
  } else if (const auto* t = std::get_if<TabulatedW>(&spec)) {
    if (t->radii.size() != t->values.size() || t->radii.size() < 2)
      throw std::invalid_argument("tabulated weight needs >= 2 matching knots");
    for (std::size_t i = 0; i < t->radii.size(); ++i) {
      if (!(t->radii[i] > 0.0) || !(t->values[i] > 0.0))
        throw std::invalid_argument("tabulated knots must be positive");
      if (i > 0 && !(t->radii[i] > t->radii[i - 1]))
        throw std::invalid_argument("tabulated radii must increase");
    }
  }
}

namespace weight_detail {

inline double tab_eval(const TabulatedW& t, double r) {
  if (r <= t.radii.front()) return t.values.front();
  if (r >= t.radii.back())
    return t.values.back() * std::pow(r / t.radii.back(), t.tail_exponent);
  auto it = std::upper_bound(t.radii.begin(), t.radii.end(), r);
  std::size_t j = static_cast<std::size_t>(it - t.radii.begin());
  double lr0 = std::log(t.radii[j - 1]), lr1 = std::log(t.radii[j]);
  double lv0 = std::log(t.values[j - 1]), lv1 = std::log(t.values[j]);
  double s = (std::log(r) - lr0) / (lr1 - lr0);
  return std::exp(lv0 + s * (lv1 - lv0));
}

}  // namespace weight_detail

inline double weight_eval_radial(const WeightSpec& spec, double r) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PowerW>) {
          if (r == 0.0) {
            if (s.alpha > 0.0) return 0.0;
            if (s.alpha == 0.0) return 1.0;
            return kInf;
          }
          return std::pow(r, s.alpha);
        } else if constexpr (std::is_same_v<T, ConstantW>) {
          return s.c;
        } else if constexpr (std::is_same_v<T, ExpRadialW>) {
          return std::exp(s.rate * r);
        } else if constexpr (std::is_same_v<T, InvPolyW>) {
          return std::pow(1.0 + std::pow(r, s.alpha), -s.k);
        } else {
          return weight_detail::tab_eval(s, r);
        }
      },
      spec);
}

inline double weight_eval(const WeightSpec& spec, const Point& x, int n) {
  return weight_eval_radial(spec, norm(x, n));
}

// spec^s as a new spec; total on every variant.
inline WeightSpec weight_pow(const WeightSpec& spec, double s) {
  return std::visit(
      [&](const auto& w) -> WeightSpec {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerW>) {
          return PowerW{w.alpha * s};
        } else if constexpr (std::is_same_v<T, ConstantW>) {
          return ConstantW{std::pow(w.c, s)};
        } else if constexpr (std::is_same_v<T, ExpRadialW>) {
          return ExpRadialW{w.rate * s};
        } else if constexpr (std::is_same_v<T, InvPolyW>) {
          return InvPolyW{w.alpha, w.k * s};
        } else {
          TabulatedW out = w;
          for (double& v : out.values) v = std::pow(v, s);
          out.tail_exponent = w.tail_exponent * s;
          return out;
        }
      },
      spec);
}

// Exponent e with w(x) ~ |x|^e as |x| -> infinity (+-inf for exponentials).
inline double radial_growth_exponent(const WeightSpec& spec) {
  return std::visit(
      [](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerW>) return w.alpha;
        if constexpr (std::is_same_v<T, ConstantW>) return 0.0;
        if constexpr (std::is_same_v<T, ExpRadialW>)
          return w.rate > 0 ? kInf : (w.rate < 0 ? -kInf : 0.0);
        if constexpr (std::is_same_v<T, InvPolyW>) return -w.alpha * w.k;
        if constexpr (std::is_same_v<T, TabulatedW>) return w.tail_exponent;
      },
      spec);
}

// Exponent e with w(x) ~ |x|^e as |x| -> 0 (nonzero only for powers).
inline double origin_exponent(const WeightSpec& spec) {
  if (const auto* p = std::get_if<PowerW>(&spec)) return p->alpha;
  return 0.0;
}

inline bool weight_origin_singular(const WeightSpec& spec) {
  return origin_exponent(spec) < 0.0;
}

inline bool locally_integrable(const WeightSpec& spec, int n) {
  if (const auto* p = std::get_if<PowerW>(&spec)) return p->alpha > -static_cast<double>(n);
  return true;
}

// Radii where the profile is merely continuous (tabulated knots); integrands
// built from the weight pass these along as break circles.
inline std::vector<double> weight_break_radii(const WeightSpec& spec) {
  if (const auto* t = std::get_if<TabulatedW>(&spec)) return t->radii;
  return {};
}

// ---- pointwise suprema (radial profiles, closed form where possible) ----

namespace weight_detail {

template <class G>
double grid_golden_sup(const G& g, double lo, double hi, int grid = 512) {
  double best = -kInf;
  double arg = lo;
  for (int i = 0; i <= grid; ++i) {
    double r = lo + (hi - lo) * i / grid;
    double v = g(r);
    if (v > best) best = v, arg = r;
    if (std::isinf(v) && v > 0) return kInf;
  }
  double step = (hi - lo) / grid;
  double refined = quad_detail::golden_max(g, std::max(lo, arg - step), std::min(hi, arg + step));
  return std::max(best, refined);
}

}  // namespace weight_detail

// sup of w over {x : r_lo <= |x| <= r_hi}; r_hi may be infinite.
inline double weight_sup_radial_range(const WeightSpec& spec, double r_lo, double r_hi) {
  bool unbounded = std::isinf(r_hi);
  return std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerW>) {
          if (w.alpha == 0.0) return 1.0;
          if (w.alpha > 0.0) return unbounded ? kInf : std::pow(r_hi, w.alpha);
          return weight_eval_radial(spec, r_lo);
        } else if constexpr (std::is_same_v<T, ConstantW>) {
          return w.c;
        } else if constexpr (std::is_same_v<T, ExpRadialW>) {
          if (w.rate > 0.0) return unbounded ? kInf : std::exp(w.rate * r_hi);
          if (w.rate < 0.0) return std::exp(w.rate * r_lo);
          return 1.0;
        } else if constexpr (std::is_same_v<T, InvPolyW>) {
          if (w.k >= 0.0) return weight_eval_radial(spec, r_lo);
          return unbounded ? kInf : weight_eval_radial(spec, r_hi);
        } else {
          double best = weight_eval_radial(spec, r_lo);
          if (unbounded) {
            if (w.tail_exponent > 0.0) return kInf;
            best = std::max(best, w.values.back());
          } else {
            best = std::max(best, weight_eval_radial(spec, r_hi));
          }
          for (std::size_t i = 0; i < w.radii.size(); ++i)
            if (w.radii[i] >= r_lo && (unbounded || w.radii[i] <= r_hi))
              best = std::max(best, w.values[i]);
          return best;
        }
      },
      spec);
}

inline double weight_sup_on_ball(const WeightSpec& spec, const Ball& ball, int n) {
  double d = norm(ball.center, n);
  double r_lo = std::max(0.0, d - ball.radius);
  double r_hi = d + ball.radius;
  return weight_sup_radial_range(spec, r_lo, r_hi);
}

inline double weight_sup_on_complement(const WeightSpec& spec, const Ball& ball, int n) {
  double d = norm(ball.center, n);
  double r_lo = std::max(0.0, ball.radius - d);
  return weight_sup_radial_range(spec, r_lo, kInf);
}

// Integrand view of a weight, with singularity, decay, and break metadata.
inline Integrand weight_integrand(const WeightSpec& spec, int n) {
  Integrand f;
  f.eval = [spec, n](const Point& x) { return weight_eval(spec, x, n); };
  if (weight_origin_singular(spec)) f.singular_points.push_back(kOrigin);
  f.decay_exponent = -radial_growth_exponent(spec);
  for (double r : weight_break_radii(spec)) f.break_circles.push_back({kOrigin, r});
  return f;
}

// ---- radial power integrals (Lemma-style exact forms) --------------------

struct PowerBallIntegral {
  double value = 0.0;
  double comparand = 0.0;  // R^n max{R, |x_B|}^alpha
};

inline PowerBallIntegral power_ball_integral(double alpha, const Ball& ball, int n,
                                             double tol = 1e-9) {
  check_dim(n);
  if (!(alpha > -static_cast<double>(n)))
    throw std::invalid_argument("power_ball_integral needs alpha > -n");
  PowerBallIntegral out;
  out.comparand = std::pow(ball.radius, n) *
                  std::pow(std::max(ball.radius, norm(ball.center, n)), alpha);
  if (n == 1) {
    // Signed antiderivative of |x|^alpha, valid across the origin.
    auto F = [&](double x) {
      double s = (x >= 0.0) ? 1.0 : -1.0;
      return s * std::pow(std::abs(x), alpha + 1.0) / (alpha + 1.0);
    };
    double a = ball.center[0] - ball.radius, b = ball.center[0] + ball.radius;
    out.value = F(b) - F(a);
    return out;
  }
  double d = norm(ball.center, 2);
  if (d == 0.0) {
    out.value = 2.0 * M_PI * std::pow(ball.radius, alpha + 2.0) / (alpha + 2.0);
    return out;
  }
  Integrand f;
  f.eval = [alpha](const Point& y) {
    double r = std::hypot(y[0], y[1]);
    if (r == 0.0) return alpha > 0 ? 0.0 : (alpha == 0.0 ? 1.0 : kInf);
    return std::pow(r, alpha);
  };
  if (alpha < 0.0) f.singular_points.push_back(kOrigin);
  QuadResult q = integrate_ball(f, ball, 2, tol);
  out.value = q.value;
  return out;
}

// ---- class-constant estimators -------------------------------------------

struct ConstantEstimate {
  double value = 0.0;  // max of the per-ball quantity; may be +inf
  int balls_tested = 0;
  Ball argmax_ball{};
  bool diverged = false;    // some per-ball integral was analytically divergent
  bool overflowed = false;  // some per-ball quantity exceeded the overflow cap
};

namespace weight_detail {

inline void offer(ConstantEstimate& est, double v, const Ball& b, bool diverged,
                  bool overflowed) {
  est.balls_tested += 1;
  est.diverged |= diverged;
  est.overflowed |= overflowed;
  if (std::isnan(v)) return;
  if (v > est.value || est.balls_tested == 1) {
    est.value = v;
    est.argmax_ball = b;
  }
}

}  // namespace weight_detail

// [w]_{RH_s}: per ball ((1/|B|) int_B w^s)^{1/s} / ((1/|B|) int_B w); the
// numerator for s = infinity is the (essential = pointwise) sup over B.
inline ConstantEstimate rh_constant(const WeightSpec& spec, double s, int n,
                                    const SamplePlan& plan, double tol = 1e-7) {
  if (!(s > 1.0)) throw std::invalid_argument("rh_constant needs s > 1");
  validate_weight(spec);
  ConstantEstimate est;
  Integrand base = weight_integrand(spec, n);
  Integrand powd = std::isinf(s) ? base : weight_integrand(weight_pow(spec, s), n);
  for (const Ball& B : plan.balls(n)) {
    QuadResult den = integrate_ball(base, B, n, tol);
    double meanw = den.value / ball_volume(B, n);
    double num;
    bool dv = den.diverged, ov = den.overflowed;
    if (std::isinf(s)) {
      num = weight_sup_on_ball(spec, B, n);
    } else {
      QuadResult up = integrate_ball(powd, B, n, tol);
      dv |= up.diverged;
      ov |= up.overflowed;
      num = std::pow(up.value / ball_volume(B, n), 1.0 / s);
    }
    double ratio = num / meanw;
    if (dv) ratio = kInf;
    weight_detail::offer(est, ratio, B, dv, ov || (std::isinf(ratio) && !dv));
  }
  return est;
}

// sup_B w(2B) / w(B) over the plan, w(E) = int_E w.
inline ConstantEstimate doubling_constant(const WeightSpec& spec, int n,
                                          const SamplePlan& plan, double tol = 1e-7) {
  validate_weight(spec);
  ConstantEstimate est;
  Integrand f = weight_integrand(spec, n);
  for (const Ball& B : plan.balls(n)) {
    QuadResult inner = integrate_ball(f, B, n, tol);
    QuadResult outer = integrate_ball(f, dilate(B, 2.0), n, tol);
    bool dv = inner.diverged || outer.diverged;
    bool ov = inner.overflowed || outer.overflowed;
    double ratio = outer.value / inner.value;
    if (dv || ov) ratio = kInf;
    weight_detail::offer(est, ratio, B, dv, ov);
  }
  return est;
}

// Endpoint multilinear class constant:
//   sup_B ||X_B prod v_i||_inf prod_i ((1/|B|) int_B v_i^{-p_i'})^{1/p_i'},
// where a p_i = 1 factor degenerates to ||v_i^{-1} X_B||_inf.
inline ConstantEstimate a_p_infty_constant(const std::vector<WeightSpec>& vspecs,
                                           const std::vector<Exponent>& pvec, int n,
                                           const SamplePlan& plan, double tol = 1e-7) {
  if (vspecs.size() != pvec.size() || vspecs.empty())
    throw std::invalid_argument("a_p_infty_constant needs matching nonempty specs");
  for (const auto& v : vspecs) validate_weight(v);
  std::size_t m = vspecs.size();
  std::vector<Exponent> conj;
  std::vector<Integrand> neg;  // v_i^{-p_i'} for the integral factors
  for (std::size_t i = 0; i < m; ++i) {
    conj.push_back(holder_conjugate(pvec[i]));
    if (pvec[i] != Exponent(1.0))
      neg.push_back(weight_integrand(weight_pow(vspecs[i], -conj.back().value()), n));
    else
      neg.push_back(Integrand{});
  }
  ConstantEstimate est;
  for (const Ball& B : plan.balls(n)) {
    double d = norm(B.center, n);
    double r_lo = std::max(0.0, d - B.radius), r_hi = d + B.radius;
    auto product = [&](double r) {
      double p = 1.0;
      for (const auto& v : vspecs) p *= weight_eval_radial(v, r);
      return p;
    };
    double value = weight_detail::grid_golden_sup(product, r_lo, r_hi);
    bool dv = false, ov = false;
    for (std::size_t i = 0; i < m && !dv; ++i) {
      if (pvec[i] == Exponent(1.0)) {
        value *= weight_sup_on_ball(weight_pow(vspecs[i], -1.0), B, n);
      } else {
        QuadResult q = integrate_ball(neg[i], B, n, tol);
        dv |= q.diverged;
        ov |= q.overflowed;
        value *= std::pow(q.value / ball_volume(B, n), conj[i].reciprocal());
      }
    }
    if (dv) value = kInf;
    weight_detail::offer(est, value, B, dv, ov || (std::isinf(value) && !dv));
  }
  return est;
}

}  // namespace fraclab
