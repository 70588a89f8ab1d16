#pragma once

// JSON and CSV emission for every report type.
//
// Reports must be byte-identical across re-runs, so every floating-point
// number is rounded to 12 significant digits before it enters the document
// and the two non-finite values are spelled "inf" and "nan" (JSON has no
// encoding for them). Field names are lowercase snake case throughout.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "fraclab/exponents.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/hclass.hpp"
#include "fraclab/lipschitz.hpp"
#include "fraclab/params.hpp"
#include "fraclab/region.hpp"
#include "fraclab/sample_plan.hpp"
#include "fraclab/verify.hpp"
#include "fraclab/weights.hpp"
#include "json.hpp"

namespace fraclab {

using Json = nlohmann::ordered_json;

// Numbers enter reports through this shim only.
inline Json jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::stod(buf);
}

inline Json jnum(const Exponent& p) {
  if (p.is_inf()) return "inf";
  return jnum(p.value());
}

inline Json to_json(const Ball& b, int n) {
  Json j;
  j["center"] = Json::array();
  for (int k = 0; k < n; ++k) j["center"].push_back(jnum(b.center[k]));
  j["radius"] = jnum(b.radius);
  return j;
}

inline Json to_json(const Params& q) {
  Json j;
  j["n"] = q.n;
  j["m"] = q.m;
  j["gamma"] = jnum(q.gamma);
  j["delta"] = jnum(q.delta);
  j["p"] = Json::array();
  for (const auto& p : q.pvec) j["p"].push_back(jnum(p));
  j["gamma_split"] = Json::array();
  for (double g : q.gamma_split) j["gamma_split"].push_back(jnum(g));
  return j;
}

inline Json to_json(const SamplePlan& plan) {
  Json j;
  j["seed"] = plan.seed;
  j["radii_count"] = plan.radii_count;
  j["r_min"] = jnum(plan.r_min);
  j["r_max"] = jnum(plan.r_max);
  j["random_centers"] = plan.random_centers;
  j["center_reach"] = jnum(plan.center_reach);
  j["points_per_set"] = plan.points_per_set;
  return j;
}

inline Json to_json(const WeightSpec& spec) {
  return std::visit(
      [](const auto& w) -> Json {
        using T = std::decay_t<decltype(w)>;
        Json j;
        if constexpr (std::is_same_v<T, PowerW>) {
          j["type"] = "power";
          j["alpha"] = jnum(w.alpha);
        } else if constexpr (std::is_same_v<T, ConstantW>) {
          j["type"] = "constant";
          j["value"] = jnum(w.c);
        } else if constexpr (std::is_same_v<T, ExpRadialW>) {
          j["type"] = "exp_radial";
          j["rate"] = jnum(w.rate);
        } else if constexpr (std::is_same_v<T, InvPolyW>) {
          j["type"] = "inv_poly";
          j["alpha"] = jnum(w.alpha);
          j["k"] = jnum(w.k);
        } else {
          j["type"] = "tabulated";
          j["radii"] = Json::array();
          for (double r : w.radii) j["radii"].push_back(jnum(r));
          j["values"] = Json::array();
          for (double v : w.values) j["values"].push_back(jnum(v));
          j["tail_exponent"] = jnum(w.tail_exponent);
        }
        return j;
      },
      spec);
}

inline Json to_json(const WeightPair& pair) {
  Json j;
  j["w"] = to_json(pair.w);
  j["v"] = Json::array();
  for (const auto& v : pair.vvec) j["v"].push_back(to_json(v));
  return j;
}

inline Json to_json(const HReport& rep, int n) {
  Json j;
  j["sup_full"] = jnum(rep.sup_full);
  j["sup_local"] = jnum(rep.sup_local);
  j["sup_global"] = jnum(rep.sup_global);
  j["argmax_full"] = to_json(rep.argmax_full, n);
  j["argmax_local"] = to_json(rep.argmax_local, n);
  j["argmax_global"] = to_json(rep.argmax_global, n);
  j["balls_tested"] = rep.balls_tested;
  if (rep.divergence_witness) j["divergence_witness"] = to_json(*rep.divergence_witness, n);
  if (rep.slope_diag) j["origin_slope"] = jnum(*rep.slope_diag);
  j["shrink_blowup_ratio"] = jnum(rep.shrink_blowup_ratio);
  j["growth_blowup_ratio"] = jnum(rep.growth_blowup_ratio);
  if (rep.stability) j["stability"] = jnum(*rep.stability);
  return j;
}

inline std::string h_report_csv(const HReport& rep, int n) {
  std::ostringstream out;
  out << (n == 2 ? "center_x,center_y,radius,full,local,global\n"
                 : "center_x,radius,full,local,global\n");
  char buf[40];
  auto put = [&](double x) {
    if (std::isnan(x)) {
      out << "nan";
    } else if (std::isinf(x)) {
      out << (x > 0 ? "inf" : "-inf");
    } else {
      std::snprintf(buf, sizeof buf, "%.12g", x);
      out << buf;
    }
  };
  for (const auto& row : rep.per_ball) {
    put(row.ball.center[0]);
    if (n == 2) {
      out << ',';
      put(row.ball.center[1]);
    }
    out << ',';
    put(row.ball.radius);
    out << ',';
    put(row.full);
    out << ',';
    put(row.local);
    out << ',';
    put(row.global);
    out << '\n';
  }
  return out.str();
}

inline Json to_json(const LipReport& rep, int n) {
  Json j;
  j["value"] = jnum(rep.value);
  j["argmax"] = to_json(rep.argmax, n);
  j["balls_tested"] = rep.balls_tested;
  j["stability"] = jnum(rep.stability);
  return j;
}

inline Json to_json(const RegionVerdict& v) {
  Json j;
  j["status"] = status_name(v.status);
  if (v.case_label) j["case"] = std::string(1, v.case_label);
  j["witnesses"] = v.witnesses;
  return j;
}

inline Json to_json(const ConstructedExample& ex) {
  Json j;
  j["case"] = std::string(1, ex.case_label);
  j["pair"] = to_json(ex.pair);
  j["alpha"] = jnum(ex.alpha);
  j["beta"] = Json::array();
  for (double b : ex.beta) j["beta"].push_back(jnum(b));
  if (!std::isnan(ex.epsilon)) j["epsilon"] = jnum(ex.epsilon);
  j["verdict"] = to_json(ex.verdict);
  return j;
}

inline Json polygon_json(const RegionSheet& sheet) {
  Json j;
  j["n"] = sheet.n;
  j["m"] = sheet.m;
  j["gamma"] = jnum(sheet.gamma);
  j["tau"] = jnum(sheet.tau);
  j["polygon"] = Json::array();
  for (const auto& v : sheet.polygon) j["polygon"].push_back({jnum(v[0]), jnum(v[1])});
  j["tau_line"] = {{jnum(sheet.tau_line_from[0]), jnum(sheet.tau_line_from[1])},
                   {jnum(sheet.tau_line_to[0]), jnum(sheet.tau_line_to[1])}};
  j["relation_line"] = {
      {jnum(sheet.relation_line_from[0]), jnum(sheet.relation_line_from[1])},
      {jnum(sheet.relation_line_to[0]), jnum(sheet.relation_line_to[1])}};
  if (sheet.open_corner)
    j["open_corner"] = {jnum((*sheet.open_corner)[0]), jnum((*sheet.open_corner)[1])};
  return j;
}

inline std::string region_csv(const RegionSheet& sheet) {
  std::ostringstream out;
  out << "inv_p,delta,status,case_label\n";
  char buf[40];
  for (const auto& cell : sheet.cells) {
    std::snprintf(buf, sizeof buf, "%.12g", cell.inv_p);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.12g", cell.delta);
    out << buf << ',' << status_name(cell.verdict.status) << ',';
    if (cell.verdict.case_label) out << cell.verdict.case_label;
    out << '\n';
  }
  return out.str();
}

inline Json to_json(const HypothesisReport& h) {
  Json j;
  j["p_above_n_over_gamma"] = h.p_above_n_over_gamma;
  j["rh_m_constants"] = Json::array();
  for (double c : h.rh_m_constants) j["rh_m_constants"].push_back(jnum(c));
  j["met"] = h.met;
  if (!h.note.empty()) j["note"] = h.note;
  return j;
}

inline Json to_json(const BoundCheck& b, int n) {
  Json j;
  j["hypotheses"] = to_json(b.hypotheses);
  j["skipped"] = b.skipped;
  if (b.skipped) return j;
  j["lhs_sup"] = jnum(b.lhs_sup);
  j["argmax"] = to_json(b.argmax, n);
  j["norm_product"] = jnum(b.norm_prod);
  j["ratio"] = jnum(b.ratio);
  j["balls_tested"] = b.balls_tested;
  return j;
}

inline Json to_json(const Lemma21Report& rep, int n) {
  Json j;
  j["rh_inf_constants"] = Json::array();
  for (double c : rep.rh_inf_constants) j["rh_inf_constants"].push_back(jnum(c));
  j["doubling_constants"] = Json::array();
  for (double c : rep.doubling_constants) j["doubling_constants"].push_back(jnum(c));
  j["hypotheses_met"] = rep.hypotheses_met;
  if (!rep.hypotheses_met) return j;
  j["sup_full"] = jnum(rep.sup_full);
  j["sup_global"] = jnum(rep.sup_global);
  j["ratio_full_over_global"] = jnum(rep.ratio_full_over_global);
  j["ratio_global_over_full"] = jnum(rep.ratio_global_over_full);
  j["argmax_full"] = to_json(rep.argmax_full, n);
  j["argmax_global"] = to_json(rep.argmax_global, n);
  j["balls_tested"] = rep.balls_tested;
  return j;
}

inline Json to_json(const Lemma22Report& rep, int n) {
  Json j;
  j["tau"] = jnum(rep.tau);
  j["delta"] = jnum(rep.delta);
  j["sup_local"] = jnum(rep.sup_local);
  j["sup_global"] = jnum(rep.sup_global);
  j["ratio_global_over_local"] = jnum(rep.ratio_global_over_local);
  j["implication_holds"] = rep.implication_holds;
  j["argmax_local"] = to_json(rep.argmax_local, n);
  j["argmax_global"] = to_json(rep.argmax_global, n);
  j["balls_tested"] = rep.balls_tested;
  return j;
}

}  // namespace fraclab
