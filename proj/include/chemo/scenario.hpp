#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include "chemo/twospecies.hpp"

namespace chemo {

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

enum class MethodKind { drift, newton, secant, switch_protocol, gain_study };

struct DriftMethod {
  double rate = 0.001;
  double s_lo = 0.0;
  double s_hi = 1.0;
  double max_time = 1e9;
};

struct SecantMethod {
  SecantConfig cfg;
  // Seeds are produced by two Newton solves at these abscissae unless
  // explicit points are given.
  std::array<double, 2> seed_grid{0.0, 0.0};
  std::optional<std::array<std::pair<double, double>, 2>> seed_points;
  double seed_tol = 1e-3;
};

struct ScenarioConfig {
  std::string name;
  PlantParams plant;
  ControllerConfig controller;
  FeedbackLaw law = FeedbackLaw::simple;
  ControllerState refs0;
  Disturbance disturbance;
  SettleConfig settle;
  double h = 0.01;
  double record_every = 1.0;
  double error_skip = 0.0;  // model time excluded from the error statistics
  unsigned long seed = 1;
  std::string out_dir = "out";
  std::optional<PlantState> initial;

  MethodKind kind = MethodKind::drift;
  DriftMethod drift;
  NewtonConfig newton;
  SecantMethod secant;
  SwitchProtocol protocol;
  GainStudyConfig gain_study;
};

// Parses and validates a scenario file; every violated invariant is reported
// with its field path.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::string& name);

// Initial plant state: explicit from the config, or s(0) at the output
// reference with the remaining mass split evenly across species.
PlantState initial_state(const ScenarioConfig& cfg);

struct RunReport {
  int exit_code = 0;  // 0 ok, 1 flagged points, 2 config, 3 numerical
  std::string summary;
  std::vector<std::filesystem::path> files;
  double model_time = 0.0;
};

RunReport run_scenario(const ScenarioConfig& cfg,
                       const std::filesystem::path& out_dir, bool quiet);

// Reference outputs that need no simulation: the oracle identification curve
// (single species) or the closed-form/numerical eigenvalue table at the
// exclusion equilibrium (two species).
RunReport write_reference_outputs(const ScenarioConfig& cfg,
                                  const std::filesystem::path& out_dir);

std::string format_double(double v);  // full precision, locale-independent

}  // namespace chemo
