#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracdamp/config.hpp"
#include "fracdamp/csv.hpp"

namespace fracdamp {

struct Assertion {
  std::string name;
  bool passed = false;
  /// Soft assertions are reported but do not affect the exit status.
  bool hard = true;
  double value = 0.0;
  std::string relation;  // "<=", "<", ">", ">=", "in [a,b]", "true"
  double threshold = 0.0;
  std::string detail;
};

struct ScenarioTable {
  std::string file;
  CsvTable table;
};

struct ScenarioError {
  std::string kind;  // config, integrator-failure, state-blow-up, fit-failed, runtime-error
  std::string message;
  std::string stage;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<Assertion> assertions;
  std::map<std::string, double> fitted_constants;
  std::vector<ScenarioTable> tables;
  std::optional<ScenarioError> error;

  /// No error and every hard assertion holds.
  bool passed() const;
  const Assertion* find(const std::string& name) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs one scenario. Module errors are caught and reported in `error`
/// together with the stage that raised them.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const ProgressFn& progress = {});

/// Keys: schema, scenario, status, params, assertions[], fitted_constants{},
/// tables[], error, wall_time (null unless given).
nlohmann::json summary_json(const ScenarioConfig& cfg, const ScenarioResult& result,
                            std::optional<double> wall_time = std::nullopt);

/// Writes every table plus summary.json into `dir` (created if missing).
void write_artifacts(const std::filesystem::path& dir, const ScenarioConfig& cfg, const ScenarioResult& result,
                     std::optional<double> wall_time = std::nullopt);

}  // namespace fracdamp
