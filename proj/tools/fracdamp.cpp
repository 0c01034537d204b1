#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fracdamp/config.hpp"
#include "fracdamp/scenarios.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::optional<fracdamp::ScenarioKind> scenario_by_name(const std::string& name) {
  for (auto k : fracdamp::all_scenarios())
    if (fracdamp::scenario_name(k) == name) return k;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs one fractional-damping wave experiment from a key = value config file."};
  std::string config_path, out_dir, defaults_for;
  std::optional<std::uint64_t> seed;
  bool verbose = false, timing = false;
  app.add_option("config", config_path, "Config file (one run per file)");
  app.add_option("-o,--out", out_dir, "Output directory (overrides the config's `out`)");
  app.add_option("-s,--seed", seed, "RNG seed (overrides the config's `seed`)");
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
  app.add_flag("--timing", timing, "Record wall time in summary.json");
  app.add_option("--defaults", defaults_for, "Print the default config of a scenario and exit");
  CLI11_PARSE(app, argc, argv);

  if (!defaults_for.empty()) {
    auto k = scenario_by_name(defaults_for);
    if (!k) {
      std::cerr << "unknown scenario '" << defaults_for << "'\n";
      return kExitError;
    }
    std::cout << fracdamp::config_to_text(fracdamp::default_config(*k));
    return 0;
  }
  if (config_path.empty()) {
    std::cerr << "a config file is required (see --help)\n";
    return kExitError;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot read " << config_path << "\n";
    return kExitError;
  }
  std::stringstream text;
  text << in.rdbuf();

  fracdamp::ScenarioConfig cfg;
  try {
    cfg = fracdamp::parse_config(text.str());
  } catch (const fracdamp::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  if (seed) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.out = out_dir;
  if (verbose) std::cerr << "effective config:\n" << fracdamp::config_to_text(cfg);

  const auto start = std::chrono::steady_clock::now();
  fracdamp::ProgressFn progress;
  if (verbose) progress = [](const std::string& msg) { std::cerr << "[fracdamp] " << msg << "\n"; };
  const fracdamp::ScenarioResult result = fracdamp::run_scenario(cfg, progress);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    fracdamp::write_artifacts(cfg.out, cfg, result, timing ? std::optional<double>(elapsed) : std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }

  for (const auto& a : result.assertions)
    std::cout << (a.passed ? "PASS " : (a.hard ? "FAIL " : "WARN ")) << a.name << " = " << a.value << " ("
              << a.relation << " " << a.threshold << ")\n";
  if (result.error) {
    std::cout << "ERROR " << result.error->kind << ": " << result.error->message << " [" << result.error->stage
              << "]\n";
    return kExitError;
  }
  return result.passed() ? 0 : kExitFail;
}
