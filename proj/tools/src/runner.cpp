#include "lgsim_cli/runner.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "lgsim/error.hpp"
#include "lgsim/three_box.hpp"
#include "lgsim/three_level.hpp"
#include "lgsim_cli/protocol_spec.hpp"

namespace lgsim::cli {

namespace {

using json = nlohmann::ordered_json;
namespace tl = lgsim::threelevel;

constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "0.1.0";

json vec(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json mat(const RMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

json arr3(const std::array<double, 3>& v) { return json::array({number(v[0]), number(v[1]), number(v[2])}); }

json lgi(const LgiResult& r) {
  json j;
  j["value"] = number(r.value);
  j["bound"] = number(r.bound);
  j["bound_kind"] = r.lower_bound ? "lower" : "upper";
  j["violated"] = r.violated;
  j["decomposition"] = {{"probability_term", number(r.decomposition.probability_term)},
                        {"signalling_term", number(r.decomposition.signalling_term)},
                        {"kappa_term", number(r.decomposition.kappa_term)}};
  return j;
}

json report(const SignallingReport& r) {
  json j;
  j["delta"] = vec(r.delta);
  j["Delta"] = number(r.big_delta);
  if (r.has_ambiguous) {
    j["delta_A"] = vec(r.delta_a);
    j["D"] = vec(r.d);
    j["Delta_A"] = number(r.big_delta_a);
  }
  return j;
}

json point(const tl::Params& p, const tl::PointValues& v) {
  json j;
  j["theta"] = number(p.theta);
  j["phi"] = number(p.phi);
  j["chi"] = number(p.chi);
  j["theta_over_pi"] = number(p.theta / kPi);
  j["phi_over_pi"] = number(p.phi / kPi);
  j["chi_over_pi"] = number(p.chi / kPi);
  j["K"] = number(v.K);
  j["K_A"] = number(v.K_A);
  j["Delta"] = number(v.Delta);
  j["Delta_A"] = number(v.Delta_A);
  j["weak_K"] = number(v.weak_K);
  j["delta_A"] = arr3(v.delta_a);
  j["delta"] = arr3(v.delta);
  return j;
}

json maximum(const tl::Maximum& m) {
  json j = point(m.params, m.values);
  j["value"] = number(m.value);
  return j;
}

tl::ScanOptions scan_options(const RunConfig& cfg) {
  tl::ScanOptions o;
  o.theta_min = cfg.theta_min;
  o.theta_max = cfg.theta_max;
  o.phi_min = cfg.phi_min;
  o.phi_max = cfg.phi_max;
  o.theta_points = cfg.theta_points;
  o.phi_points = cfg.phi_points;
  o.workers = cfg.workers;
  o.chi.residual_tol = cfg.chi_tolerance;
  return o;
}

tl::ChiOptions chi_options(const RunConfig& cfg) {
  tl::ChiOptions o;
  o.residual_tol = cfg.chi_tolerance;
  return o;
}

json scan_summary(const tl::ScanGrid& grid) {
  const tl::GridPoint* best_ka = nullptr;
  const tl::GridPoint* best_weak = nullptr;
  std::size_t invalid = 0, ka_viol = 0, k_viol = 0;
  for (const auto& g : grid.points) {
    if (!g.chi_found) {
      ++invalid;
      continue;
    }
    if (!best_ka || g.values.K_A > best_ka->values.K_A) best_ka = &g;
    if (!best_weak || g.values.weak_K > best_weak->values.weak_K) best_weak = &g;
    ka_viol += g.ka_violated;
    k_viol += g.k_violated;
  }
  json j;
  j["theta_points"] = grid.theta_axis.size();
  j["phi_points"] = grid.phi_axis.size();
  j["theta_range"] = {number(grid.theta_axis.front()), number(grid.theta_axis.back())};
  j["phi_range"] = {number(grid.phi_axis.front()), number(grid.phi_axis.back())};
  j["rows"] = grid.points.size();
  j["invalid_points"] = invalid;
  j["ka_violations"] = ka_viol;
  j["k_violations"] = k_viol;
  if (best_ka) {
    j["max_K_A"] = point({best_ka->phi, best_ka->chi, best_ka->theta}, best_ka->values);
    j["max_weak_K"] = point({best_weak->phi, best_weak->chi, best_weak->theta}, best_weak->values);
    j["weak_bound_respected"] = best_weak->values.weak_K <= 1.5 + tol::kViolation;
  } else {
    j["max_K_A"] = nullptr;
    j["max_weak_K"] = nullptr;
    j["weak_bound_respected"] = true;
  }
  return j;
}

json contour_summary(const ContourSet& cs) {
  std::size_t vertices = 0;
  for (const auto& l : cs.polylines) vertices += l.points.size();
  json j;
  j["polylines"] = cs.polylines.size();
  j["vertices"] = vertices;
  j["rejected_crossings"] = cs.rejected_crossings;
  j["isolated_zeros"] = cs.isolated_zeros.size();
  j["length"] = number(total_length(cs));
  return j;
}

void add_file(RunOutput& out, const RunConfig& cfg, const char* name, std::string content) {
  if (cfg.out) out.files.push_back({*cfg.out / name, std::move(content)});
}

RunOutput run_scan(const RunConfig& cfg, bool weak) {
  tl::ScanOptions o = scan_options(cfg);
  if (weak) o.weak_epsilon = cfg.epsilon;
  const tl::ScanGrid grid = tl::scan(o);
  RunOutput out;
  json r = scan_summary(grid);
  if (weak) {
    double best = -INFINITY;
    const tl::GridPoint* at = nullptr;
    for (const auto& g : grid.points) {
      if (g.weak_eps_K_A && *g.weak_eps_K_A > best) {
        best = *g.weak_eps_K_A;
        at = &g;
      }
    }
    r["epsilon"] = cfg.epsilon;
    if (at) {
      r["max_weak_eps_K_A"] = {{"value", number(best)},
                               {"theta", number(at->theta)},
                               {"phi", number(at->phi)},
                               {"chi", number(at->chi)},
                               {"weak_K", number(at->values.weak_K)},
                               {"Delta_A", number(at->weak_eps_Delta_A.value_or(NAN))}};
    } else {
      r["max_weak_eps_K_A"] = nullptr;
    }
  }
  out.summary["results"] = std::move(r);
  add_file(out, cfg, "scan.csv", scan_csv(grid, weak));
  add_file(out, cfg, "scan.jsonl", scan_jsonl(grid, weak));
  return out;
}

RunOutput run_contour(const RunConfig& cfg, bool maximize) {
  const tl::Evaluator ev;
  const tl::ChiOptions chi = chi_options(cfg);
  const tl::ScanGrid grid = tl::scan(scan_options(cfg), ev);
  const ContourSet cs = tl::no_signalling_contours(grid, ev, chi);
  RunOutput out;
  json r = scan_summary(grid);
  r["contours"] = contour_summary(cs);
  if (maximize) {
    if (cs.empty()) throw NumericalError("no no-signalling contours on this grid");
    const auto ka = tl::maximize_on_contour(cs, tl::Objective::InvertedKA, ev, chi);
    const auto wk = tl::maximize_on_contour(cs, tl::Objective::WeakK, ev, chi);
    r["no_signalling_max_K_A"] = maximum(ka);
    r["no_signalling_max_weak_K"] = maximum(wk);
    auto cut = [&](double phi, tl::Objective obj) {
      const auto c = tl::maximize_on_cut(ev, phi, obj, std::nullopt, cfg.cut_samples, chi);
      json j;
      j["phi"] = number(phi);
      j["phi_over_pi"] = number(phi / kPi);
      j["local_max"] = maximum(c.local);
      j["global_max"] = maximum(c.global);
      j["no_signalling_crossing"] = c.crossing ? maximum(*c.crossing) : json(nullptr);
      return j;
    };
    r["cut_K_A"] = cut(cfg.cut_phi, tl::Objective::InvertedKA);
    r["cut_weak_K"] = cut(cfg.weak_cut_phi, tl::Objective::WeakK);
  }
  out.summary["results"] = std::move(r);
  add_file(out, cfg, "scan.csv", scan_csv(grid, false));
  add_file(out, cfg, "contours.json", contours_json(cs).dump(2) + "\n");
  return out;
}

RunOutput run_chi(const RunConfig& cfg) {
  const tl::Evaluator ev;
  const auto sol = tl::solve_chi(ev, *cfg.phi, *cfg.theta, chi_options(cfg));
  json r;
  r["phi"] = number(*cfg.phi);
  r["theta"] = number(*cfg.theta);
  r["found"] = sol.has_value();
  if (sol) {
    const tl::Params p{*cfg.phi, sol->chi, *cfg.theta};
    r["chi"] = number(sol->chi);
    r["chi_over_pi"] = number(sol->chi / kPi);
    r["residual"] = number(sol->residual);
    r["point"] = point(p, ev.evaluate(p));
  } else {
    r["chi"] = nullptr;
    r["chi_over_pi"] = nullptr;
    r["residual"] = nullptr;
    r["point"] = nullptr;
  }
  RunOutput out;
  out.summary["results"] = std::move(r);
  return out;
}

RunOutput run_threebox() {
  const auto res = threebox::run();
  json r;
  r["K_prime"] = lgi(res.k_prime);
  r["signalling"] = report(res.report);
  r["Q2_expectation"] = {{"t2_only", number(res.q2.t2_only)}, {"joint_marginal", number(res.q2.joint_marginal)}};
  r["left_inverse"] = mat(threebox::detector().d());
  r["unambiguous"] = {{"K_prime", lgi(res.k_prime_unambiguous)}, {"signalling", report(res.report_unambiguous)}};
  RunOutput out;
  out.summary["results"] = std::move(r);
  return out;
}

RunOutput run_custom(const RunConfig& cfg) {
  const ExperimentProtocol proto = protocol_from_json(cfg.protocol);
  const ProbabilityTables t = run_protocol(proto);
  json r;
  r["tables"] = {{"P3", vec(t.p3)}, {"P32", mat(t.p32)}, {"P2", vec(t.p2)}};
  if (t.has_ambiguous()) {
    r["tables"]["P3alpha"] = mat(t.p3alpha);
    r["tables"]["P2alpha"] = vec(t.p2alpha);
  }
  r["signalling"] = report(signalling_report(t));
  r["K"] = lgi(correlator_K(proto, t));
  if (proto.detector()) {
    r["K_A"] = lgi(correlator_K_ambiguous(proto, t));
    r["K_prime"] = lgi(correlator_Kprime(proto, t));
    r["kappa"] = mat(kappa_via_X(proto));
  }
  r["weak_K"] = number(weak_limit_K(proto));
  RunOutput out;
  out.summary["results"] = std::move(r);
  return out;
}

}  // namespace

RunOutput run(const RunConfig& cfg) {
  validate(cfg);
  RunOutput out;
  switch (cfg.scenario) {
    case Scenario::ThreeLevelScan: out = run_scan(cfg, false); break;
    case Scenario::WeakScan: out = run_scan(cfg, true); break;
    case Scenario::ThreeLevelContour: out = run_contour(cfg, false); break;
    case Scenario::ThreeLevelMaximize: out = run_contour(cfg, true); break;
    case Scenario::ChiSolve: out = run_chi(cfg); break;
    case Scenario::ThreeBox: out = run_threebox(); break;
    case Scenario::Custom: out = run_custom(cfg); break;
  }
  json summary;
  summary["scenario"] = std::string(scenario_name(cfg.scenario));
  summary["version"] = kVersion;
  summary["results"] = std::move(out.summary["results"]);
  summary["files"] = json::array();
  for (const auto& f : out.files) summary["files"].push_back(f.path.filename().string());
  if (cfg.out) {
    const auto path = *cfg.out / "summary.json";
    summary["files"].push_back(path.filename().string());
    out.files.push_back({path, summary.dump(2) + "\n"});
  }
  out.summary = std::move(summary);
  return out;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Leggett-Garg correlator and signalling simulator", "lgsim"};
  std::string scenario;
  Overrides ov;
  std::string config_path, out_path, phi, theta, cut_phi;
  int workers = -1, resolution = -1;
  double epsilon = 0.0;
  app.add_option("scenario", scenario,
                 "threelevel-scan | threelevel-contour | threelevel-maximize | chi-solve | "
                 "threebox | weak-scan | custom")
      ->required();
  auto* o_config = app.add_option("--config", config_path, "JSON config document");
  auto* o_out = app.add_option("--out", out_path, "output directory for detailed artifacts");
  auto* o_workers = app.add_option("--workers", workers, "scan worker threads (0 = all cores)");
  auto* o_res = app.add_option("--resolution", resolution, "grid points per axis");
  auto* o_eps = app.add_option("--epsilon", epsilon, "weak detector strength in (0, 1]");
  auto* o_phi = app.add_option("--phi", phi, "phi angle, e.g. 0.5pi");
  auto* o_theta = app.add_option("--theta", theta, "theta angle, e.g. 0.831pi");
  auto* o_cut = app.add_option("--cut-phi", cut_phi, "phi of the fixed-phi cuts (maximize)");
  app.set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "lgsim: error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto sc = parse_scenario(scenario);
    if (!sc) throw ConfigError("unknown scenario '" + scenario + "'");
    if (*o_config) ov.config = config_path;
    if (*o_out) ov.out = out_path;
    if (*o_workers) ov.workers = workers;
    if (*o_res) ov.resolution = resolution;
    if (*o_eps) ov.epsilon = epsilon;
    if (*o_phi) ov.phi = phi;
    if (*o_theta) ov.theta = theta;
    if (*o_cut) ov.cut_phi = cut_phi;
    const RunConfig cfg = load_config(*sc, ov);
    const RunOutput out = run(cfg);
    write_files_atomic(out.files);
    std::cout << out.summary.dump() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "lgsim: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lgsim: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lgsim::cli
