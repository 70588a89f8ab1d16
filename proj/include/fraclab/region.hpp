#pragma once

// Parameter-region classification and the six-case example constructor.
//
// In the (1/p, delta) plane the class is nontrivial exactly on the band
// gamma - mn <= delta <= min{1, gamma - n/p}, except for the single corner
// point delta = gamma - n/p = 1. Above the band the condition forces some
// v_i to be infinite a.e.; below it additionally w = 0 a.e. Inside the band
// the constructive sub-cases (a) through (f) are dispatched by the position
// of delta relative to gamma - mn, tau and gamma - n/p; band points that no
// constructive case reaches are reported as such instead of being guessed
// at. The slanted top edge between tau and 1 coincides with the line
// delta = gamma - n/p that the related-weights result pins down, and is
// labelled accordingly.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclab/hclass.hpp"
#include "fraclab/params.hpp"
#include "fraclab/weights.hpp"

namespace fraclab {

enum class RegionStatus {
  nontrivial_example_exists,
  trivial_v_infinite,
  trivial_v_or_w,
  related_weights_line,
  outside_all_results,
};

inline const char* status_name(RegionStatus s) {
  switch (s) {
    case RegionStatus::nontrivial_example_exists: return "nontrivial_example_exists";
    case RegionStatus::trivial_v_infinite: return "trivial_v_infinite";
    case RegionStatus::trivial_v_or_w: return "trivial_v_or_w";
    case RegionStatus::related_weights_line: return "related_weights_line";
    case RegionStatus::outside_all_results: return "outside_all_results";
  }
  return "?";
}

struct RegionVerdict {
  RegionStatus status = RegionStatus::outside_all_results;
  char case_label = 0;  // 'a'..'f' when an example construction applies
  std::vector<std::string> witnesses;
};

namespace region_detail {

inline std::string ineq(const char* text, double lhs, double rhs) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s (%.6g vs %.6g)", text, lhs, rhs);
  return buf;
}

}  // namespace region_detail

inline RegionVerdict classify_region(const Params& q) {
  validate(q);
  const double floor_delta = q.gamma - static_cast<double>(q.m) * q.n;
  const double line = q.gamma - n_over_p(q);
  const double t = tau_threshold(q);
  const double d = q.delta;
  RegionVerdict v;

  if (d > 1.0 || d > line) {
    v.status = RegionStatus::trivial_v_infinite;
    if (d > 1.0) v.witnesses.push_back(region_detail::ineq("delta > 1", d, 1.0));
    if (d > line)
      v.witnesses.push_back(region_detail::ineq("delta > gamma - n/p", d, line));
    return v;
  }
  if (d == line && d == 1.0) {
    v.status = RegionStatus::trivial_v_infinite;
    v.witnesses.push_back(region_detail::ineq("delta = gamma - n/p = 1", d, line));
    return v;
  }
  if (d < floor_delta) {
    v.status = RegionStatus::trivial_v_or_w;
    v.witnesses.push_back(region_detail::ineq("delta < gamma - mn", d, floor_delta));
    return v;
  }

  // Inside the admissible band: pick the constructive sub-case.
  v.status = RegionStatus::nontrivial_example_exists;
  v.witnesses.push_back(region_detail::ineq("gamma - mn <= delta", floor_delta, d));
  v.witnesses.push_back(region_detail::ineq("delta <= min(1, gamma - n/p)", d,
                                            std::min(1.0, line)));
  if (d == floor_delta) {
    v.case_label = 'f';
    v.witnesses.push_back(region_detail::ineq("delta = gamma - mn", d, floor_delta));
    return v;
  }
  if (d < t) {
    if (t <= line) {
      v.case_label = 'a';
      v.witnesses.push_back(region_detail::ineq("delta < tau <= gamma - n/p", d, t));
    } else {
      v.case_label = 'b';
      v.witnesses.push_back(region_detail::ineq("delta <= gamma - n/p < tau", line, t));
    }
    return v;
  }
  if (d == t) {
    if (line > 1.0) {
      v.case_label = 'c';
      v.witnesses.push_back(region_detail::ineq("delta = tau < 1 < gamma - n/p", t, line));
      return v;
    }
    if (line < 1.0) {
      v.case_label = 'd';
      v.witnesses.push_back(region_detail::ineq("delta = tau < gamma - n/p < 1", t, line));
      return v;
    }
  } else if (d < 1.0 && d < line) {
    v.case_label = 'e';
    v.witnesses.push_back(region_detail::ineq("tau < delta < min(1, gamma - n/p)", t, d));
    return v;
  }

  // In the band but outside every constructive case. The slanted top edge
  // above tau is exactly the related-weights line.
  if (d == line) {
    v.status = RegionStatus::related_weights_line;
    v.witnesses.push_back(region_detail::ineq("delta = gamma - n/p", d, line));
  } else {
    v.status = RegionStatus::outside_all_results;
    v.witnesses.push_back(
        region_detail::ineq("inside the band but no constructive case applies", d, t));
  }
  return v;
}

// A fully resolved example pair together with the choices that produced it.
struct ConstructedExample {
  WeightPair pair;
  char case_label = 0;
  double alpha = 0.0;                  // exponent of w (or its inv-poly rate for case f)
  std::vector<double> beta;            // per-slot power exponents, empty for case f
  double epsilon = std::numeric_limits<double>::quiet_NaN();  // case (a) only
  RegionVerdict verdict;
};

inline ConstructedExample construct_example(const Params& q) {
  RegionVerdict verdict = classify_region(q);
  if (verdict.status != RegionStatus::nontrivial_example_exists) {
    std::string msg = "no example construction for this parameter point: ";
    msg += status_name(verdict.status);
    for (const auto& w : verdict.witnesses) msg += "; " + w;
    throw std::domain_error(msg);
  }

  const int m = q.m;
  const double t = tau_threshold(q);
  const double np = n_over_p(q);
  ConstructedExample out;
  out.case_label = verdict.case_label;
  out.verdict = verdict;
  std::vector<int> ones = index_set_one(q), twos = index_set_gt_one(q);
  const int m1 = static_cast<int>(ones.size());

  auto conj_recip = [&](int i) {  // 1/p_i'
    return 1.0 - q.pvec[static_cast<std::size_t>(i)].reciprocal();
  };
  auto power_pair = [&](double alpha, const std::vector<double>& beta) {
    out.alpha = alpha;
    out.beta = beta;
    out.pair.w = PowerW{alpha};
    out.pair.vvec.clear();
    for (double b : beta) out.pair.vvec.push_back(PowerW{b});
  };

  switch (verdict.case_label) {
    case 'a': {
      if (m1 >= m)
        throw std::domain_error("case (a) needs at least one exponent above 1");
      out.epsilon = (m * q.n - q.gamma + q.delta) / (2.0 * (m - m1));
      std::vector<double> beta(m, 0.0);
      for (int i : twos) beta[i] = q.n * conj_recip(i) - out.epsilon;
      double alpha = q.delta - q.gamma + np;
      for (double b : beta) alpha += b;
      power_pair(alpha, beta);
      break;
    }
    case 'b': {
      std::vector<double> beta(m, 0.0);
      for (int i = 0; i < m; ++i)
        beta[i] = (q.gamma - q.delta) / m - q.n * q.pvec[i].reciprocal();
      out.beta = beta;
      out.alpha = 0.0;
      out.pair.w = ConstantW{1.0};
      out.pair.vvec.clear();
      for (double b : beta) out.pair.vvec.push_back(PowerW{b});
      break;
    }
    case 'c':
    case 'd': {
      std::vector<double> beta(m, 0.0);
      for (int i : twos) {
        double lo = (q.gamma - t) / m - q.n * q.pvec[i].reciprocal();
        double hi = q.n * conj_recip(i);
        beta[i] = 0.5 * (lo + hi);
      }
      double alpha = t - q.gamma + np;
      for (double b : beta) alpha += b;
      power_pair(alpha, beta);
      break;
    }
    case 'e': {
      std::vector<double> beta(m, 0.0);
      for (int i = 0; i < m; ++i)
        beta[i] = (q.gamma - t) / m - q.n * q.pvec[i].reciprocal();
      power_pair(q.delta - t, beta);
      break;
    }
    case 'f': {
      out.alpha = 1.0;
      out.pair.w = InvPolyW{1.0, static_cast<double>(m1)};
      out.pair.vvec.assign(m, ConstantW{1.0});
      for (int i : ones) out.pair.vvec[i] = ExpRadialW{1.0};
      for (int i : twos) {
        // Inverse of the shipped L^{p_i'} profile (1+|x|)^{-(n+1)/p_i'},
        // tabulated on a log grid with the matching power tail.
        double c = (q.n + 1.0) * conj_recip(i);
        TabulatedW tab;
        for (int k = 0; k <= 64; ++k) {
          double r = std::pow(10.0, -4.0 + 8.0 * k / 64.0);
          tab.radii.push_back(r);
          tab.values.push_back(std::pow(1.0 + r, c));
        }
        tab.tail_exponent = c;
        out.pair.vvec[i] = tab;
      }
      break;
    }
    default:
      throw std::logic_error("unreachable: nontrivial verdict without case label");
  }
  validate_pair(out.pair, q);
  return out;
}

// ---- the related-weights line ----------------------------------------------

// When w = prod_i v_i, membership forces delta = gamma - n/p.
inline double related_weights_delta(const Params& q) {
  validate(q);
  return q.gamma - n_over_p(q);
}

struct RelatedWeightsCheck {
  double line_delta = 0.0;
  double supplied_delta = 0.0;
  bool mismatch = false;
};

inline RelatedWeightsCheck related_weights_check(const Params& q) {
  RelatedWeightsCheck c;
  c.line_delta = related_weights_delta(q);
  c.supplied_delta = q.delta;
  c.mismatch = (q.delta != c.line_delta);
  return c;
}

// ---- figure data ------------------------------------------------------------

struct RegionCell {
  double inv_p = 0.0;
  double delta = 0.0;
  RegionVerdict verdict;
};

struct RegionSheet {
  int n = 1, m = 1;
  double gamma = 0.0;
  double tau = 0.0;
  int resolution = 0;
  std::vector<RegionCell> cells;
  // Vertices of the nontrivial band, counterclockwise from the bottom-left.
  std::vector<std::array<double, 2>> polygon;
  std::array<double, 2> tau_line_from{}, tau_line_to{};
  std::array<double, 2> relation_line_from{}, relation_line_to{};
  std::optional<std::array<double, 2>> open_corner;  // excluded point, gamma > 1 only
};

inline RegionSheet region_plot_data(int n, int m, double gamma, int resolution) {
  check_dim(n);
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(gamma > 0.0) || !(gamma < m * static_cast<double>(n)))
    throw std::invalid_argument("gamma must lie in (0, mn)");
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");

  RegionSheet sheet;
  sheet.n = n;
  sheet.m = m;
  sheet.gamma = gamma;
  sheet.resolution = resolution;
  const double floor_delta = gamma - static_cast<double>(m) * n;

  const double ip_lo = 0.0, ip_hi = m + 0.5;
  const double d_lo = floor_delta - 0.5, d_hi = 1.5;
  for (int j = 0; j < resolution; ++j) {
    double inv_p = ip_lo + (ip_hi - ip_lo) * j / (resolution - 1);
    for (int i = 0; i < resolution; ++i) {
      double delta = d_lo + (d_hi - d_lo) * i / (resolution - 1);
      RegionCell cell;
      cell.inv_p = inv_p;
      cell.delta = delta;
      if (inv_p > static_cast<double>(m)) {
        cell.verdict.status = RegionStatus::outside_all_results;
        cell.verdict.witnesses.push_back(
            region_detail::ineq("1/p > m has no exponent vector", inv_p, m));
      } else {
        std::vector<Exponent> pvec(
            static_cast<std::size_t>(m),
            inv_p > 0.0 ? Exponent(m / inv_p) : Exponent::infinity());
        cell.verdict = classify_region(make_params(n, m, gamma, delta, pvec));
      }
      sheet.cells.push_back(std::move(cell));
    }
  }

  sheet.tau = tau_threshold(make_params(
      n, m, gamma, floor_delta,
      std::vector<Exponent>(static_cast<std::size_t>(m), Exponent(1.0))));
  sheet.polygon.push_back({0.0, floor_delta});
  sheet.polygon.push_back({static_cast<double>(m), floor_delta});
  if (gamma > 1.0) {
    sheet.polygon.push_back({(gamma - 1.0) / n, 1.0});
    sheet.polygon.push_back({0.0, 1.0});
    sheet.open_corner = std::array<double, 2>{(gamma - 1.0) / n, 1.0};
  } else {
    sheet.polygon.push_back({0.0, gamma});
  }
  sheet.tau_line_from = {0.0, sheet.tau};
  sheet.tau_line_to = {(gamma - sheet.tau) / n, sheet.tau};
  sheet.relation_line_from = {0.0, gamma};
  sheet.relation_line_to = {static_cast<double>(m), floor_delta};
  return sheet;
}

}  // namespace fraclab
