// Command-line surface of the laboratory.
//
// One static binary, subcommand style. A JSON config file can preload any
// option; explicit flags win over the file; FRACLAB_SEED wins over both for
// the plan seed. Every report embeds the fully resolved configuration so
// defaulted choices stay visible, and all numbers are serialized through the
// fixed-precision shim, which makes re-runs byte-identical.
//
// Exit codes: 0 success, 2 invalid input, 3 theorem hypothesis not met,
// 4 divergence detected where finiteness was requested.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fraclab/fraclab.hpp"

namespace {

using namespace fraclab;

struct FinitenessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int n = 1;
  int m = 2;
  double gamma = 1.0;
  double delta = 0.0;
  std::vector<std::string> p{"2", "2"};
  std::vector<double> gamma_split;

  SamplePlan plan;

  std::string w_spec = "constant:1";
  std::vector<std::string> v_specs;

  double tol = 1e-6;     // class-constant quadrature tolerance
  double op_tol = 1e-5;  // operator evaluation tolerance

  std::string out_path;      // empty: stdout
  std::string csv_path;      // per-ball / grid tables
  std::string polygon_path;  // region-plot only

  int resolution = 64;
  int batteries = 3;
  int necessity_batteries = 20;
  bool emit_h_report = false;
  bool require_finite = false;
  std::string field = "coord";
  std::vector<double> ball_center{0.0, 0.0};
  double ball_radius = 1.0;
  int samples = 10000;
};

Exponent parse_exponent(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return Exponent::infinity();
  return Exponent(std::stod(s));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Mini-language: power:A | constant:C | exp[:RATE] | invpoly:A:K |
// tab:PATH[:TAIL] with PATH a CSV of "radius,value" rows.
WeightSpec parse_weight(const std::string& text) {
  std::vector<std::string> tok = split(text, ':');
  const std::string& kind = tok[0];
  auto need = [&](std::size_t k) {
    if (tok.size() != k + 1)
      throw std::invalid_argument("weight '" + text + "' needs " + std::to_string(k) +
                                  " argument(s)");
  };
  if (kind == "power") {
    need(1);
    return PowerW{std::stod(tok[1])};
  }
  if (kind == "constant") {
    need(1);
    return ConstantW{std::stod(tok[1])};
  }
  if (kind == "exp") {
    if (tok.size() == 1) return ExpRadialW{1.0};
    need(1);
    return ExpRadialW{std::stod(tok[1])};
  }
  if (kind == "invpoly") {
    need(2);
    return InvPolyW{std::stod(tok[1]), std::stod(tok[2])};
  }
  if (kind == "tab") {
    if (tok.size() != 2 && tok.size() != 3)
      throw std::invalid_argument("tab weight wants tab:PATH[:TAIL]");
    std::ifstream in(tok[1]);
    if (!in) throw std::invalid_argument("cannot open weight table: " + tok[1]);
    TabulatedW t;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols = split(line, ',');
      if (cols.size() != 2) throw std::invalid_argument("weight table rows are radius,value");
      t.radii.push_back(std::stod(cols[0]));
      t.values.push_back(std::stod(cols[1]));
    }
    t.tail_exponent = tok.size() == 3 ? std::stod(tok[2]) : 0.0;
    return t;
  }
  throw std::invalid_argument("unknown weight kind '" + kind + "'");
}

Params params_of(const RunConfig& rc) {
  std::vector<std::string> ps = rc.p;
  if (ps.size() == 1 && rc.m > 1) ps.assign(static_cast<std::size_t>(rc.m), ps[0]);
  std::vector<Exponent> pv;
  for (const auto& s : ps) pv.push_back(parse_exponent(s));
  Params q = make_params(rc.n, rc.m, rc.gamma, rc.delta, pv);
  if (!rc.gamma_split.empty()) {
    q.gamma_split = rc.gamma_split;
    validate(q);
  }
  return q;
}

WeightPair pair_of(const RunConfig& rc) {
  WeightPair pair;
  pair.w = parse_weight(rc.w_spec);
  std::vector<std::string> vs = rc.v_specs;
  if (vs.empty()) vs.assign(static_cast<std::size_t>(rc.m), "constant:1");
  if (vs.size() == 1 && rc.m > 1) vs.assign(static_cast<std::size_t>(rc.m), vs[0]);
  for (const auto& s : vs) pair.vvec.push_back(parse_weight(s));
  return pair;
}

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
  }
  auto num = [&](const char* k, auto& slot) {
    if (j.contains(k)) slot = j[k].template get<std::decay_t<decltype(slot)>>();
  };
  num("n", rc.n);
  num("m", rc.m);
  num("gamma", rc.gamma);
  num("delta", rc.delta);
  if (j.contains("p")) {
    rc.p.clear();
    for (const auto& e : j["p"])
      rc.p.push_back(e.is_string() ? e.get<std::string>() : std::to_string(e.get<double>()));
  }
  if (j.contains("gamma_split"))
    rc.gamma_split = j["gamma_split"].get<std::vector<double>>();
  if (j.contains("w")) rc.w_spec = j["w"].get<std::string>();
  if (j.contains("v")) rc.v_specs = j["v"].get<std::vector<std::string>>();
  if (j.contains("plan")) {
    const Json& p = j["plan"];
    if (p.contains("seed")) rc.plan.seed = p["seed"].get<std::uint64_t>();
    if (p.contains("radii_count")) rc.plan.radii_count = p["radii_count"].get<int>();
    if (p.contains("r_min")) rc.plan.r_min = p["r_min"].get<double>();
    if (p.contains("r_max")) rc.plan.r_max = p["r_max"].get<double>();
    if (p.contains("random_centers")) rc.plan.random_centers = p["random_centers"].get<int>();
    if (p.contains("center_reach")) rc.plan.center_reach = p["center_reach"].get<double>();
    if (p.contains("points_per_set")) rc.plan.points_per_set = p["points_per_set"].get<int>();
  }
  num("tol", rc.tol);
  num("op_tol", rc.op_tol);
  num("resolution", rc.resolution);
  num("batteries", rc.batteries);
  num("necessity_batteries", rc.necessity_batteries);
  if (j.contains("emit_h_report")) rc.emit_h_report = j["emit_h_report"].get<bool>();
  if (j.contains("require_finite")) rc.require_finite = j["require_finite"].get<bool>();
  if (j.contains("field")) rc.field = j["field"].get<std::string>();
  if (j.contains("ball_center")) rc.ball_center = j["ball_center"].get<std::vector<double>>();
  if (j.contains("ball_radius")) rc.ball_radius = j["ball_radius"].get<double>();
  num("samples", rc.samples);
  if (j.contains("out")) rc.out_path = j["out"].get<std::string>();
  if (j.contains("csv")) rc.csv_path = j["csv"].get<std::string>();
  if (j.contains("polygon")) rc.polygon_path = j["polygon"].get<std::string>();
}

Json resolved_config_json(const RunConfig& rc, const Params& q,
                          const std::optional<WeightPair>& pair) {
  Json j;
  j["params"] = to_json(q);
  j["plan"] = to_json(rc.plan);
  j["tol"] = jnum(rc.tol);
  j["op_tol"] = jnum(rc.op_tol);
  if (pair) j["pair"] = to_json(*pair);
  return j;
}

void emit(const RunConfig& rc, const Json& report) {
  std::string text = report.dump(2);
  text.push_back('\n');
  if (rc.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(rc.out_path);
    if (!out) throw std::invalid_argument("cannot write " + rc.out_path);
    out << text;
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

Ball ball_of(const RunConfig& rc) {
  Ball b;
  b.center[0] = rc.ball_center.empty() ? 0.0 : rc.ball_center[0];
  b.center[1] = rc.ball_center.size() > 1 ? rc.ball_center[1] : 0.0;
  b.radius = rc.ball_radius;
  return b;
}

FieldFn field_of(const RunConfig& rc) {
  std::vector<std::string> tok = split(rc.field, ':');
  if (tok[0] == "coord") return [](const Point& x) { return x[0]; };
  if (tok[0] == "power") {
    double s = tok.size() > 1 ? std::stod(tok[1]) : 1.0;
    int n = rc.n;
    return [s, n](const Point& x) { return std::pow(norm(x, n), s); };
  }
  if (tok[0] == "bump") {
    int n = rc.n;
    return [n](const Point& x) { return test_eval(BumpF{kOrigin, 1.0, 1.0}, x, n); };
  }
  throw std::invalid_argument("unknown field '" + rc.field + "' (coord|power:S|bump)");
}

int cmd_classify(const RunConfig& rc) {
  Params q = params_of(rc);
  Json report;
  report["command"] = "classify";
  report["config"] = resolved_config_json(rc, q, std::nullopt);
  report["result"] = to_json(classify_region(q));
  emit(rc, report);
  return 0;
}

int cmd_construct(const RunConfig& rc) {
  Params q = params_of(rc);
  RegionVerdict verdict = classify_region(q);
  Json report;
  report["command"] = "construct";
  report["config"] = resolved_config_json(rc, q, std::nullopt);
  if (verdict.status != RegionStatus::nontrivial_example_exists) {
    report["result"] = to_json(verdict);
    report["error"] = "no example construction at this parameter point";
    emit(rc, report);
    return 3;
  }
  ConstructedExample ex = construct_example(q);
  report["result"] = to_json(ex);
  if (rc.emit_h_report) {
    HReport h = h_constant(ex.pair, q, rc.plan, rc.tol);
    report["h_report"] = to_json(h, q.n);
    if (!rc.csv_path.empty()) write_file(rc.csv_path, h_report_csv(h, q.n));
  }
  emit(rc, report);
  return 0;
}

int cmd_check_h(const RunConfig& rc) {
  Params q = params_of(rc);
  WeightPair pair = pair_of(rc);
  HReport h = h_constant(pair, q, rc.plan, rc.tol);
  Json report;
  report["command"] = "check-h";
  report["config"] = resolved_config_json(rc, q, pair);
  report["result"] = to_json(h, q.n);
  if (!rc.csv_path.empty()) write_file(rc.csv_path, h_report_csv(h, q.n));
  emit(rc, report);
  if (rc.require_finite && (h.divergence_witness || !std::isfinite(h.sup_full)))
    throw FinitenessError("class constant diverged on the plan");
  return 0;
}

int cmd_verify_bound(const RunConfig& rc) {
  Params q = params_of(rc);
  WeightPair pair = pair_of(rc);
  Json report;
  report["command"] = "verify-bound";
  report["config"] = resolved_config_json(rc, q, pair);

  // Forward direction on a small battery set; the necessity direction on a
  // larger one since it is far cheaper per ball.
  SamplePlan forward_plan = rc.plan;
  forward_plan.radii_count = std::min(rc.plan.radii_count, 12);
  forward_plan.random_centers = std::min(rc.plan.random_centers, 4);
  bool skipped = false;
  report["forward"] = Json::array();
  for (int k = 0; k < rc.batteries; ++k) {
    Rng rng(rc.plan.seed + 101 + static_cast<std::uint64_t>(k));
    std::vector<TestFunction> fvec = make_bump_battery(rng, q.m, q.n);
    BoundCheck chk = verify_forward_bound(fvec, pair, q, forward_plan, rc.op_tol);
    report["forward"].push_back(to_json(chk, q.n));
    skipped = skipped || chk.skipped;
    if (chk.skipped) break;  // hypotheses do not depend on the battery
  }
  if (!skipped) {
    report["necessity"] = Json::array();
    double worst = 0.0;
    for (int k = 0; k < rc.necessity_batteries; ++k) {
      Rng rng(rc.plan.seed + 501 + static_cast<std::uint64_t>(k));
      std::vector<TestFunction> fvec = make_bump_battery(rng, q.m, q.n);
      BoundCheck chk = verify_necessity_bound(fvec, pair, q, rc.plan, rc.tol);
      report["necessity"].push_back(to_json(chk, q.n));
      worst = std::max(worst, chk.ratio);
    }
    report["necessity_constant"] = jnum(worst);
  }
  emit(rc, report);
  return skipped ? 3 : 0;
}

int cmd_estimate_lip(const RunConfig& rc) {
  Params q = params_of(rc);
  WeightSpec w = parse_weight(rc.w_spec);
  LipReport rep = lip_seminorm(field_of(rc), w, q.delta, q.n, rc.plan);
  Json report;
  report["command"] = "estimate-lip";
  report["config"] = resolved_config_json(rc, q, std::nullopt);
  report["config"]["w"] = to_json(w);
  report["config"]["field"] = rc.field;
  report["result"] = to_json(rep, q.n);
  emit(rc, report);
  if (rc.require_finite && !std::isfinite(rep.value))
    throw FinitenessError("lip seminorm estimate diverged on the plan");
  return 0;
}

int cmd_region_plot(const RunConfig& rc) {
  RegionSheet sheet = region_plot_data(rc.n, rc.m, rc.gamma, rc.resolution);
  Json report;
  report["command"] = "region-plot";
  report["n"] = rc.n;
  report["m"] = rc.m;
  report["gamma"] = jnum(rc.gamma);
  report["resolution"] = rc.resolution;
  report["result"] = polygon_json(sheet);
  if (!rc.csv_path.empty()) write_file(rc.csv_path, region_csv(sheet));
  if (!rc.polygon_path.empty()) write_file(rc.polygon_path, polygon_json(sheet).dump(2) + "\n");
  emit(rc, report);
  return 0;
}

int cmd_lemma21(const RunConfig& rc) {
  Params q = params_of(rc);
  WeightPair pair = pair_of(rc);
  Lemma21Report rep = lemma_2_1_experiment(pair, q, rc.plan, rc.tol);
  Json report;
  report["command"] = "lemma21";
  report["config"] = resolved_config_json(rc, q, pair);
  report["result"] = to_json(rep, q.n);
  emit(rc, report);
  return rep.hypotheses_met ? 0 : 3;
}

int cmd_lemma22(const RunConfig& rc) {
  Params q = params_of(rc);
  WeightPair pair = pair_of(rc);
  Lemma22Report rep = lemma_2_2_experiment(pair, q, rc.plan, rc.tol);
  Json report;
  report["command"] = "lemma22";
  report["config"] = resolved_config_json(rc, q, pair);
  report["result"] = to_json(rep, q.n);
  emit(rc, report);
  return 0;
}

int cmd_kernel_bound(const RunConfig& rc) {
  Params q = params_of(rc);
  GeometrySets gs = make_geometry(ball_of(rc), q.n);
  Rng rng(rc.plan.seed);
  double lo = kInf, sum = 0.0;
  for (int s = 0; s < rc.samples; ++s) {
    Point x = gs.sample_C1(rng);
    Point z = gs.sample_C2(rng);
    std::vector<Point> yvec;
    for (int i = 0; i < q.m; ++i) yvec.push_back(gs.sample_A(rng));
    double r = kernel_diff_ratio(gs, x, z, yvec, q);
    lo = std::min(lo, r);
    sum += r;
  }
  Json report;
  report["command"] = "kernel-bound";
  report["config"] = resolved_config_json(rc, q, std::nullopt);
  report["config"]["ball"] = to_json(gs.ball, q.n);
  report["config"]["samples"] = rc.samples;
  report["result"]["min_ratio"] = jnum(lo);
  report["result"]["mean_ratio"] = jnum(sum / rc.samples);
  report["result"]["positive"] = lo > 0.0;
  emit(rc, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;

  // The config file must land before flag binding so that flags win.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        apply_config_file(rc, argv[i + 1]);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"numerical laboratory for a multilinear fractional integral"};
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--n", rc.n, "dimension (1 or 2)");
  app.add_option("--m", rc.m, "number of operator slots");
  app.add_option("--gamma", rc.gamma, "order gamma in (0, mn)");
  app.add_option("--delta", rc.delta, "smoothness order delta");
  app.add_option("--p", rc.p, "exponents, comma separated ('inf' allowed)")->delimiter(',');
  app.add_option("--gamma-split", rc.gamma_split, "per-slot gamma_i values")->delimiter(',');
  app.add_option("--w", rc.w_spec, "weight w (power:A|constant:C|exp[:R]|invpoly:A:K|tab:PATH[:T])");
  app.add_option("--v", rc.v_specs, "weights v_i, comma separated specs")->delimiter(',');
  app.add_option("--seed", rc.plan.seed, "plan seed (FRACLAB_SEED env overrides)");
  app.add_option("--radii", rc.plan.radii_count, "radii per center in the plan");
  app.add_option("--rmin", rc.plan.r_min, "smallest plan radius");
  app.add_option("--rmax", rc.plan.r_max, "largest plan radius");
  app.add_option("--centers", rc.plan.random_centers, "random centers in the plan");
  app.add_option("--reach", rc.plan.center_reach, "largest center magnitude");
  app.add_option("--tol", rc.tol, "quadrature tolerance for class constants");
  app.add_option("--op-tol", rc.op_tol, "relative tolerance for operator evaluation");
  app.add_option("--out", rc.out_path, "write the JSON report here instead of stdout");
  app.add_option("--csv", rc.csv_path, "also write per-ball / grid CSV here");
  app.add_option("--polygon", rc.polygon_path, "write the region polygon JSON here");
  app.add_option("--resolution", rc.resolution, "region grid resolution");
  app.add_option("--batteries", rc.batteries, "forward-bound batteries");
  app.add_option("--necessity-batteries", rc.necessity_batteries, "necessity batteries");
  app.add_flag("--emit-h-report", rc.emit_h_report, "attach a class-constant report");
  app.add_flag("--require-finite", rc.require_finite, "exit 4 when the estimate diverges");
  app.add_option("--field", rc.field, "field for estimate-lip (coord|power:S|bump)");
  app.add_option("--ball-center", rc.ball_center, "kernel-bound ball center")->delimiter(',');
  app.add_option("--ball-radius", rc.ball_radius, "kernel-bound ball radius");
  app.add_option("--samples", rc.samples, "kernel-bound sample count");

  app.require_subcommand(1);
  CLI::App* c_classify = app.add_subcommand("classify", "parameter-region verdict");
  CLI::App* c_construct = app.add_subcommand("construct", "example weights for the region");
  CLI::App* c_check = app.add_subcommand("check-h", "class-constant report for a pair");
  CLI::App* c_verify = app.add_subcommand("verify-bound", "operator bound, both directions");
  CLI::App* c_lip = app.add_subcommand("estimate-lip", "weighted smoothness seminorm");
  CLI::App* c_region = app.add_subcommand("region-plot", "region sheet CSV and polygon");
  CLI::App* c_l21 = app.add_subcommand("lemma21", "full vs global form comparison");
  CLI::App* c_l22 = app.add_subcommand("lemma22", "local implies global below tau");
  CLI::App* c_kernel = app.add_subcommand("kernel-bound", "kernel difference lower bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (const char* env_seed = std::getenv("FRACLAB_SEED")) {
    try {
      rc.plan.seed = std::stoull(env_seed);
    } catch (const std::exception&) {
      std::cerr << "error: FRACLAB_SEED is not an integer\n";
      return 2;
    }
  }

  try {
    if (c_classify->parsed()) return cmd_classify(rc);
    if (c_construct->parsed()) return cmd_construct(rc);
    if (c_check->parsed()) return cmd_check_h(rc);
    if (c_verify->parsed()) return cmd_verify_bound(rc);
    if (c_lip->parsed()) return cmd_estimate_lip(rc);
    if (c_region->parsed()) return cmd_region_plot(rc);
    if (c_l21->parsed()) return cmd_lemma21(rc);
    if (c_l22->parsed()) return cmd_lemma22(rc);
    if (c_kernel->parsed()) return cmd_kernel_bound(rc);
  } catch (const FinitenessError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
