#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclab/exponents.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

// Parameter bundle for the m-linear fractional integral of order gamma acting
// toward the weighted Lipschitz class of order delta.
//
//   0 < gamma < m n,   p_i in [1, inf],   delta real.
//
// The order splits as gamma = sum_i gamma_i with 0 < gamma_i < n; the split
// enters only through the per-slot kernel exponents
//
//   theta_i = n - gamma_i + 1/m,
//
// and defaults to the uniform choice gamma_i = gamma / m, which is admissible
// for every valid (gamma, m, n). Reports echo the split they were run with.
struct Params {
  int n = 1;
  int m = 1;
  double gamma = 0.5;
  double delta = 0.0;
  std::vector<Exponent> pvec{Exponent(2.0)};
  std::vector<double> gamma_split{0.5};
};

inline std::vector<double> default_gamma_split(double gamma, int m) {
  return std::vector<double>(static_cast<std::size_t>(m), gamma / m);
}

inline void validate(const Params& q) {
  check_dim(q.n);
  if (q.m < 1) throw std::invalid_argument("m must be a positive integer");
  if (!(q.gamma > 0.0) || !(q.gamma < q.m * static_cast<double>(q.n)))
    throw std::invalid_argument("gamma must lie in (0, m n)");
  if (!std::isfinite(q.delta)) throw std::invalid_argument("delta must be finite");
  if (q.pvec.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("pvec must have m entries");
  if (q.gamma_split.size() != static_cast<std::size_t>(q.m))
    throw std::invalid_argument("gamma_split must have m entries");
  double s = 0.0;
  for (double g : q.gamma_split) {
    if (!(g > 0.0) || !(g < q.n)) throw std::invalid_argument("each gamma_i must lie in (0, n)");
    s += g;
  }
  if (std::abs(s - q.gamma) > 1e-12 * std::max(1.0, std::abs(q.gamma)))
    throw std::invalid_argument("gamma_split must sum to gamma");
}

inline Params make_params(int n, int m, double gamma, double delta,
                          std::vector<Exponent> pvec,
                          std::vector<double> gamma_split = {}) {
  Params q;
  q.n = n;
  q.m = m;
  q.gamma = gamma;
  q.delta = delta;
  q.pvec = std::move(pvec);
  q.gamma_split = gamma_split.empty() ? default_gamma_split(gamma, m) : std::move(gamma_split);
  validate(q);
  return q;
}

// 1/p = sum_i 1/p_i for the tuple; n/p follows. p itself may fall below 1.
inline double inv_p(const Params& q) { return aggregate_reciprocal(q.pvec); }
inline double n_over_p(const Params& q) { return q.n * inv_p(q); }

// Slots with p_i = 1 (index set I1) versus p_i > 1 (I2).
inline std::vector<int> index_set_one(const Params& q) {
  std::vector<int> out;
  for (int i = 0; i < q.m; ++i)
    if (!q.pvec[i].is_inf() && q.pvec[i].value() == 1.0) out.push_back(i);
  return out;
}

inline std::vector<int> index_set_gt_one(const Params& q) {
  std::vector<int> out;
  for (int i = 0; i < q.m; ++i)
    if (q.pvec[i].is_inf() || q.pvec[i].value() > 1.0) out.push_back(i);
  return out;
}

// Kernel exponent attached to slot i.
inline double theta_i(const Params& q, int i) {
  return q.n - q.gamma_split[static_cast<std::size_t>(i)] + 1.0 / q.m;
}

// tau = (gamma - m n)(1 - 1/m) + 1/m; the threshold between the regime where
// the local condition self-improves and the regime where it does not. Equals 1
// when m = 1 and is strictly below 1/m otherwise (gamma < m n).
inline double tau_threshold(const Params& q) {
  double mn = static_cast<double>(q.m) * q.n;
  return (q.gamma - mn) * (1.0 - 1.0 / q.m) + 1.0 / q.m;
}

}  // namespace fraclab
