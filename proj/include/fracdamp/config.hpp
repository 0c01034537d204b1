#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fracdamp {

enum class ScenarioKind {
  decay,
  smoothing,
  tail,
  stability,
  alpha_sweep,
  commutator_suite,
  mollifier_suite,
  picard_demo,
  attractor_compare,
};

std::string_view scenario_name(ScenarioKind k);
const std::vector<ScenarioKind>& all_scenarios();

/// One run of one scenario. Field defaults depend on the scenario; see
/// default_config.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::decay;

  int dim = 1;
  double box_length = 100.0;
  int modes = 1024;

  double alpha = 0.75;
  double p = 3.0;
  double c0 = 0.0;
  double c1 = 1.0;
  std::string nonlinearity = "power";  // power | saturating
  std::string forcing = "none";        // none | bump | gaussian
  double forcing_amplitude = 0.5;
  double forcing_radius = 4.0;

  std::string data = "gaussian";  // gaussian | compact
  double u0_amplitude = 1.0;
  double u0_width = 2.0;
  double u1_amplitude = 0.5;
  double u1_width = 2.0;
  double rough_delta = 0.1;
  double rough_amplitude = 1.0;

  double dt = 0.01;
  std::string scheme = "duhamel-etd";  // duhamel-etd | reference-rk4
  bool dealias = true;
  int l_trunc = -1;  // < 0: full problem
  double T = 50.0;
  int stride = 10;

  std::uint64_t seed = 1;
  std::string out = "out";

  // decay
  double residual_T = 20.0;
  // smoothing
  int fine_modes = 0;  // 0: twice `modes`
  // tail
  std::vector<double> radii;
  double psi_delta = 0.25;
  // stability
  std::vector<double> horizons{1.0, 2.0, 4.0};
  double perturbation = 1e-4;
  // alpha-sweep / attractor-compare
  double alpha0 = 0.75;
  std::vector<double> deltas{0.05, 0.025, 0.0125};
  double calibration_delta = 0.075;
  double burn = 20.0;
  double span = 4.0;
  double spacing = 0.5;
  // commutator-suite
  int ensemble = 200;
  // mollifier-suite
  std::vector<double> levels{0, 1, 2, 3, 4};
  // picard-demo
  int picard_l = 4;
  int picard_steps = 200;
  int picard_pairs = 6;
};

/// Every violated constraint, each prefixed with the owning module
/// ("[dynamics] dissipative index out of (1/2,1)").
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

ScenarioConfig default_config(ScenarioKind kind);

/// Parses "key = value" lines ('#' starts a comment). `scenario` is required;
/// keys that do not exist, or do not apply to the chosen scenario, are
/// rejected. Throws ConfigError listing every problem found.
ScenarioConfig parse_config(std::string_view text);

/// Re-checks every constraint; returns the list of violations (empty if valid).
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

/// The keys that apply to the config's scenario with their effective values.
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Canonical "key = value" text of config_to_json; parse_config round-trips it.
std::string config_to_text(const ScenarioConfig& cfg);

}  // namespace fracdamp
