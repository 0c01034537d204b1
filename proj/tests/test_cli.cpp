#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracdamp/config.hpp"
#include "fracdamp/csv.hpp"
#include "fracdamp/scenarios.hpp"

using namespace fracdamp;

namespace {

std::vector<std::string> parse_errors(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool has_error(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const auto& e) { return e.find(needle) != std::string::npos; });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("a minimal config takes the scenario defaults") {
  const auto cfg = parse_config("# comment\nscenario = tail\n\nseed = 7  # trailing\n");
  CHECK(cfg.scenario == ScenarioKind::tail);
  CHECK(cfg.seed == 7);
  const auto def = default_config(ScenarioKind::tail);
  CHECK(cfg.box_length == def.box_length);
  CHECK(cfg.modes == def.modes);
  CHECK(cfg.radii == def.radii);
  CHECK(config_to_json(cfg)["seed"] == 7);
}

TEST_CASE("every default config is valid and round-trips through text") {
  for (auto k : all_scenarios()) {
    CAPTURE(scenario_name(k));
    const auto cfg = default_config(k);
    CHECK(validate_config(cfg).empty());
    const auto back = parse_config(config_to_text(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(config_to_json(cfg)["scenario"] == std::string(scenario_name(k)));
  }
}

TEST_CASE("constraint violations are reported with their module") {
  auto e = parse_errors("scenario = decay\nalpha = 1.2\n");
  CHECK(has_error(e, "[dynamics] dissipative index out of (1/2,1)"));

  e = parse_errors("scenario = decay\ndim = 3\nalpha = 0.55\np = 7\nmodes = 16\nbox_length = 10\n");
  CHECK(has_error(e, "[nonlinearity]"));
  CHECK(has_error(e, "p_"));

  e = parse_errors("scenario = decay\ndim = 4\nc0 = 1.5\nmodes = 7\n");
  CHECK(has_error(e, "[spectral-core]"));
  CHECK(has_error(e, "[nonlinearity]"));
  CHECK(e.size() >= 3);

  e = parse_errors("scenario = decay\nnonlinearity = saturating\n");
  CHECK(has_error(e, "growth exponent 1"));
}

TEST_CASE("malformed configs list every problem with line numbers") {
  auto e = parse_errors("scenario = decay\nbogus = 1\nradii = 8,16\nalpha = abc\nseed = 1\nseed = 2\nnot a line\n");
  CHECK(has_error(e, "line 2: unknown key 'bogus'"));
  CHECK(has_error(e, "key 'radii' does not apply to scenario decay"));
  CHECK(has_error(e, "alpha"));
  CHECK(has_error(e, "line 6: duplicate key 'seed'"));
  CHECK(has_error(e, "line 7: expected key = value"));
  for (const auto& s : e) CHECK(s.rfind("[", 0) == 0);

  CHECK(has_error(parse_errors("alpha = 0.7\n"), "missing key 'scenario'"));
  CHECK(has_error(parse_errors("scenario = nope\n"), "unknown scenario 'nope'"));
  CHECK(has_error(parse_errors("scenario = commutator-suite\ndt = 0.1\n"), "does not apply"));

  try {
    parse_config("scenario = decay\nalpha = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).rfind("invalid configuration:", 0) == 0);
  }
}

TEST_CASE("csv table formatting") {
  CsvTable t("demo.v1", {"a", "b,c"});
  t.add_row(std::vector<double>{1.5, std::nan("")});
  t.add_row(std::vector<std::string>{"say \"hi\"", "x\ny"});
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "# schema=demo.v1\na,\"b,c\"\n1.5,nan\n\"say \"\"hi\"\"\",\"x\ny\"\n");
  CHECK(csv_number(1.0 / 3.0) == "0.333333333333");
  CHECK(csv_number(-INFINITY) == "-inf");
  CHECK_THROWS(t.add_row(std::vector<double>{1.0}));
}

TEST_CASE("scenario runs are reproducible and write a complete summary") {
  auto cfg = default_config(ScenarioKind::mollifier_suite);
  cfg.ensemble = 5;
  const auto dir = std::filesystem::temp_directory_path() / "fracdamp_test_cli";
  std::filesystem::remove_all(dir);
  const auto r1 = run_scenario(cfg);
  const auto r2 = run_scenario(cfg);
  CHECK_FALSE(r1.error.has_value());
  CHECK(r1.passed());
  write_artifacts(dir / "one", cfg, r1);
  write_artifacts(dir / "two", cfg, r2);
  for (const auto& entry : std::filesystem::directory_iterator(dir / "one")) {
    CAPTURE(entry.path());
    CHECK(slurp(entry.path()) == slurp(dir / "two" / entry.path().filename()));
  }

  const auto j = nlohmann::json::parse(slurp(dir / "one" / "summary.json"));
  for (const char* key :
       {"schema", "scenario", "status", "params", "assertions", "fitted_constants", "tables", "error", "wall_time"})
    CHECK(j.contains(key));
  CHECK(j["schema"] == "fracdamp.summary.v1");
  CHECK(j["status"] == "pass");
  CHECK(j["error"].is_null());
  CHECK(j["wall_time"].is_null());
  CHECK(summary_json(cfg, r1, 1.5)["wall_time"] == 1.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("an oversized step is a structured integrator failure") {
  auto cfg = default_config(ScenarioKind::stability);
  cfg.dt = 2.0;
  cfg.T = 4.0;
  const auto r = run_scenario(cfg);
  REQUIRE(r.error.has_value());
  CHECK(r.error->kind == "integrator-failure");
  CHECK(r.error->message.find("exceeds stability bound") != std::string::npos);
  CHECK_FALSE(r.passed());
  CHECK(summary_json(cfg, r)["status"] == "error");
}
