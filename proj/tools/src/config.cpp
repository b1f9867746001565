#include "lgsim_cli/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "lgsim/error.hpp"

namespace lgsim::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct NamedScenario {
  std::string_view name;
  Scenario value;
};

constexpr std::array<NamedScenario, 7> kScenarios{{
    {"threelevel-scan", Scenario::ThreeLevelScan},
    {"threelevel-contour", Scenario::ThreeLevelContour},
    {"threelevel-maximize", Scenario::ThreeLevelMaximize},
    {"chi-solve", Scenario::ChiSolve},
    {"threebox", Scenario::ThreeBox},
    {"weak-scan", Scenario::WeakScan},
    {"custom", Scenario::Custom},
}};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scenario", "out",   "workers",       "resolution", "theta_points", "phi_points",
      "theta_range", "phi_range", "epsilon", "phi",   "theta",         "chi_tolerance",
      "cut_phi",  "weak_cut_phi", "cut_samples", "protocol"};
  return keys;
}

double parse_number(std::string_view text, std::string_view key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("'" + std::string(key) + "': cannot parse '" + std::string(text) + "' as a number");
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

int get_int(const nlohmann::json& v, std::string_view key) {
  if (!v.is_number_integer()) throw ConfigError("'" + std::string(key) + "' must be an integer");
  return v.get<int>();
}

double get_double(const nlohmann::json& v, std::string_view key) {
  if (!v.is_number()) throw ConfigError("'" + std::string(key) + "' must be a number");
  return v.get<double>();
}

void get_range(const nlohmann::json& v, std::string_view key, double& lo, double& hi) {
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError("'" + std::string(key) + "' must be a two-element array [min, max]");
  }
  lo = parse_angle(v[0], key);
  hi = parse_angle(v[1], key);
}

}  // namespace

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (const auto& s : kScenarios) {
    if (s.name == name) return s.value;
  }
  return std::nullopt;
}

std::string_view scenario_name(Scenario s) {
  for (const auto& n : kScenarios) {
    if (n.value == s) return n.name;
  }
  return "unknown";
}

RunConfig::RunConfig()
    : theta_max(kPi), phi_max(kPi), cut_phi(0.831 * kPi), weak_cut_phi(0.856 * kPi) {}

double parse_angle_text(std::string_view text, std::string_view key) {
  std::string t = trim(text);
  if (t.empty()) throw ConfigError("'" + std::string(key) + "': empty angle");
  double divisor = 1.0;
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    divisor = parse_number(trim(std::string_view(t).substr(slash + 1)), key);
    if (divisor == 0.0) throw ConfigError("'" + std::string(key) + "': division by zero");
    t = trim(std::string_view(t).substr(0, slash));
  }
  double scale = 1.0;
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    scale = kPi;
    t = trim(std::string_view(t).substr(0, t.size() - 2));
    if (!t.empty() && t.back() == '*') t = trim(std::string_view(t).substr(0, t.size() - 1));
    if (t.empty()) t = "1";
    if (t == "-") t = "-1";
  }
  const double v = parse_number(t, key) * scale / divisor;
  if (!std::isfinite(v)) throw ConfigError("'" + std::string(key) + "' must be finite");
  return v;
}

double parse_angle(const nlohmann::json& v, std::string_view key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_angle_text(v.get<std::string>(), key);
  throw ConfigError("'" + std::string(key) + "' must be a number or an angle string like \"0.831pi\"");
}

RunConfig parse_config(Scenario scenario, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.scenario = scenario;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known_keys().count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  if (doc.contains("scenario")) {
    const auto& s = doc["scenario"];
    if (!s.is_string()) throw ConfigError("'scenario' must be a string");
    const auto parsed = parse_scenario(s.get<std::string>());
    if (!parsed) throw ConfigError("unknown scenario '" + s.get<std::string>() + "'");
    if (*parsed != scenario) {
      throw ConfigError("config is for scenario '" + s.get<std::string>() + "' but '" +
                        std::string(scenario_name(scenario)) + "' was requested");
    }
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) throw ConfigError("'out' must be a path string");
    cfg.out = doc["out"].get<std::string>();
  }
  if (doc.contains("workers")) cfg.workers = get_int(doc["workers"], "workers");
  if (doc.contains("resolution")) {
    cfg.theta_points = cfg.phi_points = get_int(doc["resolution"], "resolution");
  }
  if (doc.contains("theta_points")) cfg.theta_points = get_int(doc["theta_points"], "theta_points");
  if (doc.contains("phi_points")) cfg.phi_points = get_int(doc["phi_points"], "phi_points");
  if (doc.contains("theta_range")) get_range(doc["theta_range"], "theta_range", cfg.theta_min, cfg.theta_max);
  if (doc.contains("phi_range")) get_range(doc["phi_range"], "phi_range", cfg.phi_min, cfg.phi_max);
  if (doc.contains("epsilon")) cfg.epsilon = get_double(doc["epsilon"], "epsilon");
  if (doc.contains("phi")) cfg.phi = parse_angle(doc["phi"], "phi");
  if (doc.contains("theta")) cfg.theta = parse_angle(doc["theta"], "theta");
  if (doc.contains("chi_tolerance")) cfg.chi_tolerance = get_double(doc["chi_tolerance"], "chi_tolerance");
  if (doc.contains("cut_phi")) cfg.cut_phi = parse_angle(doc["cut_phi"], "cut_phi");
  if (doc.contains("weak_cut_phi")) cfg.weak_cut_phi = parse_angle(doc["weak_cut_phi"], "weak_cut_phi");
  if (doc.contains("cut_samples")) cfg.cut_samples = get_int(doc["cut_samples"], "cut_samples");
  if (doc.contains("protocol")) cfg.protocol = doc["protocol"];
  return cfg;
}

RunConfig load_config(Scenario scenario, const Overrides& ov) {
  nlohmann::json doc = nlohmann::json::object();
  if (ov.config) {
    std::ifstream in(*ov.config);
    if (!in) throw ConfigError("cannot open config file '" + ov.config->string() + "'");
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config file '" + ov.config->string() + "' is not valid JSON: " + e.what());
    }
  }
  RunConfig cfg = parse_config(scenario, doc);
  if (ov.out) cfg.out = *ov.out;
  if (ov.workers) cfg.workers = *ov.workers;
  if (ov.resolution) cfg.theta_points = cfg.phi_points = *ov.resolution;
  if (ov.epsilon) cfg.epsilon = *ov.epsilon;
  if (ov.phi) cfg.phi = parse_angle_text(*ov.phi, "--phi");
  if (ov.theta) cfg.theta = parse_angle_text(*ov.theta, "--theta");
  if (ov.cut_phi) {
    const double v = parse_angle_text(*ov.cut_phi, "--cut-phi");
    cfg.cut_phi = v;
    cfg.weak_cut_phi = v;
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
  if (cfg.theta_points < 2 || cfg.phi_points < 2) throw ConfigError("resolution must be at least 2");
  if (!(cfg.theta_max > cfg.theta_min)) throw ConfigError("theta_range must be non-empty (min < max)");
  if (!(cfg.phi_max > cfg.phi_min)) throw ConfigError("phi_range must be non-empty (min < max)");
  if (!(cfg.epsilon > 0.0) || cfg.epsilon > 1.0) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(cfg.chi_tolerance > 0.0)) throw ConfigError("chi_tolerance must be positive");
  if (cfg.cut_samples < 3) throw ConfigError("cut_samples must be at least 3");
  if (cfg.scenario == Scenario::ChiSolve && (!cfg.phi || !cfg.theta)) {
    throw ConfigError("chi-solve needs both phi and theta");
  }
  if (cfg.scenario == Scenario::Custom && !cfg.protocol.is_object()) {
    throw ConfigError("custom scenario needs a 'protocol' object in the config");
  }
  if (cfg.scenario != Scenario::Custom && !cfg.protocol.is_null()) {
    throw ConfigError("'protocol' is only used by the custom scenario");
  }
}

}  // namespace lgsim::cli
