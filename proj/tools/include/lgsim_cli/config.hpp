#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace lgsim::cli {

enum class Scenario {
  ThreeLevelScan,
  ThreeLevelContour,
  ThreeLevelMaximize,
  ChiSolve,
  ThreeBox,
  WeakScan,
  Custom,
};

std::optional<Scenario> parse_scenario(std::string_view name);
std::string_view scenario_name(Scenario s);

struct RunConfig {
  Scenario scenario = Scenario::ThreeBox;
  std::optional<std::filesystem::path> out;
  int workers = 0;
  int theta_points = 512;
  int phi_points = 512;
  double theta_min = 0.0;
  double theta_max = 0.0;  // angles default to pi in RunConfig()
  double phi_min = 0.0;
  double phi_max = 0.0;
  double epsilon = 1e-3;
  std::optional<double> phi;
  std::optional<double> theta;
  double chi_tolerance = 1e-12;
  double cut_phi = 0.0;
  double weak_cut_phi = 0.0;
  int cut_samples = 2001;
  nlohmann::json protocol;  ///< custom scenario only

  RunConfig();
};

/// Command-line values; each one present overrides the config document.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<int> workers;
  std::optional<int> resolution;
  std::optional<double> epsilon;
  std::optional<std::string> phi;
  std::optional<std::string> theta;
  std::optional<std::string> cut_phi;
};

/// Angle from a number or a string such as "0.831pi", "pi/2", "1.2".
double parse_angle(const nlohmann::json& v, std::string_view key);
double parse_angle_text(std::string_view text, std::string_view key);

/// Strict parse: unknown keys and wrong types raise ConfigError.
RunConfig parse_config(Scenario scenario, const nlohmann::json& doc);

/// Reads the config file (if any), applies overrides and validates.
RunConfig load_config(Scenario scenario, const Overrides& ov);

void validate(const RunConfig& cfg);

}  // namespace lgsim::cli
