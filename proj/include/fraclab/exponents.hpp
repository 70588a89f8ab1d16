#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclab {

// Lebesgue exponent in [1, inf]. Infinity is a real branch of the type, not a
// large double: conjugation, reciprocals and the aggregate exponent all switch
// on it explicitly, so no formula ever feeds inf through arithmetic blindly.
class Exponent {
 public:
  Exponent() = default;
  Exponent(double v) : v_(v) {  // NOLINT: implicit by design, p = 2 reads well
    if (std::isnan(v) || v < 1.0)
      throw std::invalid_argument("exponent must satisfy p >= 1, got " + std::to_string(v));
  }

  static Exponent infinity() {
    Exponent p;
    p.v_ = std::numeric_limits<double>::infinity();
    return p;
  }

  bool is_inf() const { return std::isinf(v_); }

  // Finite value accessor; guarded so the infinite branch can never leak.
  double value() const {
    if (is_inf()) throw std::logic_error("value() called on infinite exponent");
    return v_;
  }

  // 1/p with the convention 1/inf = 0.
  double reciprocal() const { return is_inf() ? 0.0 : 1.0 / v_; }

  bool operator==(const Exponent& o) const { return v_ == o.v_; }
  bool operator!=(const Exponent& o) const { return v_ != o.v_; }

  std::string str() const { return is_inf() ? "inf" : std::to_string(v_); }

 private:
  double v_ = 1.0;
};

// Hoelder conjugate: 1' = inf, inf' = 1, else p/(p-1).
inline Exponent holder_conjugate(const Exponent& p) {
  if (p.is_inf()) return Exponent(1.0);
  double v = p.value();
  if (v == 1.0) return Exponent::infinity();
  return Exponent(v / (v - 1.0));
}

// Sum of reciprocals 1/p = sum_i 1/p_i. Zero when every entry is infinite.
inline double aggregate_reciprocal(const std::vector<Exponent>& pvec) {
  double s = 0.0;
  for (const auto& p : pvec) s += p.reciprocal();
  return s;
}

// Aggregate exponent p with 1/p = sum 1/p_i; lands in (0, inf], and in
// particular may be below 1 for m >= 2. Returned as an extended real.
inline double aggregate_p(const std::vector<Exponent>& pvec) {
  if (pvec.empty()) throw std::invalid_argument("aggregate_p of empty exponent tuple");
  double s = aggregate_reciprocal(pvec);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / s;
}

}  // namespace fraclab
