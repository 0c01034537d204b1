#include "fracdamp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fracdamp/nonlinearity.hpp"

namespace fracdamp {

namespace {

constexpr std::pair<ScenarioKind, std::string_view> kNames[] = {
    {ScenarioKind::decay, "decay"},
    {ScenarioKind::smoothing, "smoothing"},
    {ScenarioKind::tail, "tail"},
    {ScenarioKind::stability, "stability"},
    {ScenarioKind::alpha_sweep, "alpha-sweep"},
    {ScenarioKind::commutator_suite, "commutator-suite"},
    {ScenarioKind::mollifier_suite, "mollifier-suite"},
    {ScenarioKind::picard_demo, "picard-demo"},
    {ScenarioKind::attractor_compare, "attractor-compare"},
};

std::optional<ScenarioKind> scenario_from(std::string_view s) {
  for (const auto& [k, n] : kNames)
    if (n == s) return k;
  return std::nullopt;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Parsers return an error message or nothing.
using Setter = std::function<std::optional<std::string>(ScenarioConfig&, const std::string&)>;
using Getter = std::function<nlohmann::json(const ScenarioConfig&)>;

std::optional<double> to_double(const std::string& s) {
  double v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::optional<long long> to_int(const std::string& s) {
  long long v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = to_double(trim(item));
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

struct Key {
  std::string name;
  std::set<ScenarioKind> scope;  // empty: every scenario
  Setter set;
  Getter get;
};

Key real(std::string name, double ScenarioConfig::*m, std::set<ScenarioKind> scope = {}) {
  return {name, std::move(scope),
          [m](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
            auto d = to_double(v);
            if (!d) return "expected a number";
            c.*m = *d;
            return std::nullopt;
          },
          [m](const ScenarioConfig& c) { return nlohmann::json(c.*m); }};
}

Key integer(std::string name, int ScenarioConfig::*m, std::set<ScenarioKind> scope = {}) {
  return {name, std::move(scope),
          [m](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
            auto d = to_int(v);
            if (!d || *d < std::numeric_limits<int>::min() || *d > std::numeric_limits<int>::max())
              return "expected an integer";
            c.*m = static_cast<int>(*d);
            return std::nullopt;
          },
          [m](const ScenarioConfig& c) { return nlohmann::json(c.*m); }};
}

Key word(std::string name, std::string ScenarioConfig::*m, std::vector<std::string> allowed,
         std::set<ScenarioKind> scope = {}) {
  return {name, std::move(scope),
          [m, allowed](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
            if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
              std::string msg = "expected one of";
              for (const auto& a : allowed) msg += " " + a;
              return msg;
            }
            c.*m = v;
            return std::nullopt;
          },
          [m](const ScenarioConfig& c) { return nlohmann::json(c.*m); }};
}

Key list(std::string name, std::vector<double> ScenarioConfig::*m, std::set<ScenarioKind> scope = {}) {
  return {name, std::move(scope),
          [m](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
            auto d = to_list(v);
            if (!d) return "expected a comma-separated list of numbers";
            c.*m = *d;
            return std::nullopt;
          },
          [m](const ScenarioConfig& c) { return nlohmann::json(c.*m); }};
}

const std::vector<Key>& keys() {
  using S = ScenarioKind;
  static const std::vector<Key> table = [] {
    const std::set<S> dynamic = {S::decay,     S::smoothing,   S::tail,           S::stability,
                                 S::alpha_sweep, S::picard_demo, S::attractor_compare};
    const std::set<S> data_keys = dynamic;
    const std::set<S> stepping = {S::decay,     S::smoothing,   S::tail,
                                  S::stability, S::alpha_sweep, S::attractor_compare};
    std::vector<Key> t;
    t.push_back(real("box_length", &ScenarioConfig::box_length));
    t.push_back(integer("dim", &ScenarioConfig::dim));
    t.push_back(integer("modes", &ScenarioConfig::modes));
    t.push_back(real("alpha", &ScenarioConfig::alpha,
                     {S::decay, S::smoothing, S::tail, S::stability, S::commutator_suite, S::mollifier_suite,
                      S::picard_demo}));
    t.push_back(real("p", &ScenarioConfig::p, dynamic));
    t.push_back(real("c0", &ScenarioConfig::c0, dynamic));
    t.push_back(real("c1", &ScenarioConfig::c1, dynamic));
    t.push_back(word("nonlinearity", &ScenarioConfig::nonlinearity, {"power", "saturating"}, dynamic));
    t.push_back(word("forcing", &ScenarioConfig::forcing, {"none", "bump", "gaussian"}, dynamic));
    t.push_back(real("forcing_amplitude", &ScenarioConfig::forcing_amplitude, dynamic));
    t.push_back(real("forcing_radius", &ScenarioConfig::forcing_radius, dynamic));
    t.push_back(word("data", &ScenarioConfig::data, {"gaussian", "compact"}, data_keys));
    t.push_back(real("u0_amplitude", &ScenarioConfig::u0_amplitude, data_keys));
    t.push_back(real("u0_width", &ScenarioConfig::u0_width, data_keys));
    t.push_back(real("u1_amplitude", &ScenarioConfig::u1_amplitude, data_keys));
    t.push_back(real("u1_width", &ScenarioConfig::u1_width, data_keys));
    t.push_back(real("rough_delta", &ScenarioConfig::rough_delta, {S::smoothing}));
    t.push_back(real("rough_amplitude", &ScenarioConfig::rough_amplitude, {S::smoothing}));
    t.push_back(real("dt", &ScenarioConfig::dt, stepping));
    t.push_back(word("scheme", &ScenarioConfig::scheme, {"duhamel-etd", "reference-rk4"}, stepping));
    t.push_back({"dealias",
                 dynamic,
                 [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
                   if (v == "true" || v == "1") c.dealias = true;
                   else if (v == "false" || v == "0") c.dealias = false;
                   else return "expected true or false";
                   return std::nullopt;
                 },
                 [](const ScenarioConfig& c) { return nlohmann::json(c.dealias); }});
    t.push_back(integer("l_trunc", &ScenarioConfig::l_trunc, {S::decay, S::tail, S::stability}));
    t.push_back(real("T", &ScenarioConfig::T, dynamic));
    t.push_back(integer("stride", &ScenarioConfig::stride, stepping));
    t.push_back({"seed",
                 {},
                 [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
                   std::uint64_t s{};
                   const char* end = v.data() + v.size();
                   auto [ptr, ec] = std::from_chars(v.data(), end, s);
                   if (ec != std::errc{} || ptr != end) return "expected a non-negative integer";
                   c.seed = s;
                   return std::nullopt;
                 },
                 [](const ScenarioConfig& c) { return nlohmann::json(c.seed); }});
    t.push_back(word("out", &ScenarioConfig::out, {}));
    t.push_back(real("residual_T", &ScenarioConfig::residual_T, {S::decay}));
    t.push_back(integer("fine_modes", &ScenarioConfig::fine_modes, {S::smoothing}));
    t.push_back(list("radii", &ScenarioConfig::radii, {S::tail, S::commutator_suite}));
    t.push_back(real("psi_delta", &ScenarioConfig::psi_delta, {S::tail, S::commutator_suite}));
    t.push_back(list("horizons", &ScenarioConfig::horizons, {S::stability}));
    t.push_back(real("perturbation", &ScenarioConfig::perturbation, {S::stability}));
    t.push_back(real("alpha0", &ScenarioConfig::alpha0, {S::alpha_sweep, S::attractor_compare}));
    t.push_back(list("deltas", &ScenarioConfig::deltas, {S::alpha_sweep, S::attractor_compare}));
    t.push_back(real("calibration_delta", &ScenarioConfig::calibration_delta, {S::alpha_sweep}));
    t.push_back(real("burn", &ScenarioConfig::burn, {S::alpha_sweep, S::attractor_compare}));
    t.push_back(real("span", &ScenarioConfig::span, {S::alpha_sweep, S::attractor_compare}));
    t.push_back(real("spacing", &ScenarioConfig::spacing, {S::alpha_sweep, S::attractor_compare}));
    t.push_back(integer("ensemble", &ScenarioConfig::ensemble, {S::commutator_suite, S::mollifier_suite}));
    t.push_back(list("levels", &ScenarioConfig::levels, {S::mollifier_suite}));
    t.push_back(integer("picard_l", &ScenarioConfig::picard_l, {S::picard_demo}));
    t.push_back(integer("picard_steps", &ScenarioConfig::picard_steps, {S::picard_demo}));
    t.push_back(integer("picard_pairs", &ScenarioConfig::picard_pairs, {S::picard_demo}));
    return t;
  }();
  return table;
}

bool applies(const Key& k, ScenarioKind s) { return k.scope.empty() || k.scope.count(s) > 0; }

const Key* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view scenario_name(ScenarioKind k) {
  for (const auto& [kind, n] : kNames)
    if (kind == k) return n;
  return "unknown";
}

const std::vector<ScenarioKind>& all_scenarios() {
  static const std::vector<ScenarioKind> v = [] {
    std::vector<ScenarioKind> out;
    for (const auto& [k, n] : kNames) out.push_back(k);
    return out;
  }();
  return v;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.scenario = kind;
  c.out = "out/" + std::string(scenario_name(kind));
  switch (kind) {
    case ScenarioKind::decay:
      c.forcing = "bump";  // used by the absorbing-ball runs only
      c.T = 50.0;
      c.stride = 10;
      break;
    case ScenarioKind::smoothing:
      c.box_length = 64.0;
      c.modes = 512;
      c.dt = 1.0 / 1024.0;
      c.T = 4.0;
      c.stride = 16;
      c.u0_amplitude = 0.0;
      c.u1_amplitude = 0.0;
      break;
    case ScenarioKind::tail:
      c.box_length = 256.0;
      c.modes = 2048;
      c.forcing = "bump";
      c.forcing_radius = 4.0;
      c.forcing_amplitude = 1.0;
      c.data = "compact";
      c.u0_width = 4.0;
      c.u1_width = 4.0;
      c.T = 10.0;
      c.stride = 100;
      c.radii = {8.0, 16.0, 32.0};
      break;
    case ScenarioKind::stability:
      c.box_length = 64.0;
      c.modes = 512;
      c.forcing = "bump";
      c.T = 4.0;
      c.stride = 5;
      break;
    case ScenarioKind::alpha_sweep:
      c.box_length = 64.0;
      c.modes = 512;
      c.forcing = "bump";
      c.T = 8.0;
      c.stride = 4;
      break;
    case ScenarioKind::commutator_suite:
      c.box_length = 256.0;
      c.modes = 1024;
      c.radii = {8.0, 16.0, 32.0};
      break;
    case ScenarioKind::mollifier_suite:
      c.box_length = 64.0;
      c.modes = 1024;
      c.ensemble = 50;
      break;
    case ScenarioKind::picard_demo:
      c.box_length = 50.0;
      c.modes = 512;
      c.T = 0.1;
      c.dt = 0.1 / 200.0;
      break;
    case ScenarioKind::attractor_compare:
      c.box_length = 64.0;
      c.modes = 512;
      c.forcing = "bump";
      c.deltas = {0.05};
      break;
  }
  return c;
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> err;
  auto add = [&](std::string_view module, const std::string& msg) {
    err.push_back("[" + std::string(module) + "] " + msg);
  };
  const ScenarioKind s = c.scenario;
  const bool dynamic = s != ScenarioKind::commutator_suite && s != ScenarioKind::mollifier_suite;

  if (c.dim < 1 || c.dim > 3) add("spectral-core", "dimension must be 1, 2 or 3");
  if (!(c.box_length > 0.0) || !std::isfinite(c.box_length)) add("spectral-core", "box length must be positive");
  if (c.modes < 8 || c.modes % 2 != 0) add("spectral-core", "modes per dimension must be even and at least 8");

  if (!(c.alpha > 0.5 && c.alpha < 1.0)) add("dynamics", "dissipative index out of (1/2,1)");

  if (dynamic) {
    if (!(c.p >= 1.0)) add("nonlinearity", "p must be at least 1");
    if (!(c.c0 >= 0.0 && c.c0 < 1.0)) add("nonlinearity", "C0 must lie in [0,1)");
    if (!(c.c1 >= 0.0)) add("nonlinearity", "C1 must be non-negative");
    if (c.nonlinearity == "saturating" && c.p != 1.0) add("nonlinearity", "saturating form has growth exponent 1");
    if (c.dim >= 1 && c.alpha > 0.0 && c.nonlinearity == "power") {
      const double pa = exponent_table(c.dim, c.alpha).p_alpha;
      if (c.p >= pa) add("nonlinearity", "p ≥ p_α = " + fmt(pa));
    }
    if (c.forcing != "none" && !(c.forcing_radius > 0.0)) add("dynamics", "forcing radius must be positive");
    if (!(c.u0_width > 0.0) || !(c.u1_width > 0.0)) add("dynamics", "initial data widths must be positive");
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) add("dynamics", "dt must be positive");
    if (!(c.T > 0.0) || !std::isfinite(c.T)) add("dynamics", "T must be positive");
    else if (c.dt > 0.0 && s != ScenarioKind::picard_demo) {
      const double n = c.T / c.dt;
      if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) add("dynamics", "T must be a multiple of dt");
    }
    if (c.stride < 1) add("dynamics", "stride must be at least 1");
  }
  if (c.l_trunc >= 0 && c.box_length > 0.0 && c.modes > 0 &&
      std::ldexp(1.0, c.l_trunc + 1) > M_PI * c.modes / c.box_length)
    add("mollifier", "cutoff exceeds Nyquist");

  switch (s) {
    case ScenarioKind::decay:
      if (!(c.residual_T > 0.0) || c.residual_T > c.T) add("energy", "residual_T must lie in (0, T]");
      break;
    case ScenarioKind::smoothing:
      if (c.rough_delta <= 0.0 || c.rough_delta >= 1.0) add("energy", "rough_delta must lie in (0,1)");
      if (c.fine_modes != 0 && c.fine_modes <= c.modes) add("energy", "fine_modes must exceed modes");
      if (c.T < 1.0) add("energy", "smoothing needs T >= 1");
      break;
    case ScenarioKind::tail:
    case ScenarioKind::commutator_suite:
      if (c.radii.empty()) add("tailcut-commutator", "radii must not be empty");
      if (!(c.psi_delta > 0.0 && c.psi_delta < 1.0)) add("tailcut-commutator", "psi_delta must lie in (0,1)");
      for (double R : c.radii)
        if (!(R > 0.0) || 2.0 * R * (1.0 + c.psi_delta) >= 0.5 * c.box_length)
          add("tailcut-commutator", "cutoff does not fit box (R = " + fmt(R) + ")");
      if (s == ScenarioKind::commutator_suite && c.ensemble < 4)
        add("tailcut-commutator", "ensemble must have at least 4 members");
      break;
    case ScenarioKind::stability:
      if (c.horizons.empty()) add("robustness", "horizons must not be empty");
      for (double h : c.horizons)
        if (!(h > 0.0) || h > c.T) add("robustness", "horizon " + fmt(h) + " outside (0, T]");
      if (!(c.perturbation > 0.0) || c.perturbation > 1e-4) add("robustness", "perturbation must lie in (0, 1e-4]");
      break;
    case ScenarioKind::alpha_sweep:
    case ScenarioKind::attractor_compare: {
      if (c.deltas.empty()) add("robustness", "deltas must not be empty");
      double dmax = 0.0;
      for (std::size_t i = 0; i < c.deltas.size(); ++i) {
        if (!(c.deltas[i] > 0.0)) add("robustness", "deltas must be positive");
        if (i > 0 && !(c.deltas[i] < c.deltas[i - 1])) add("robustness", "deltas must be strictly decreasing");
        dmax = std::max(dmax, c.deltas[i]);
      }
      if (s == ScenarioKind::alpha_sweep) dmax = std::max(dmax, c.calibration_delta);
      const double a0 = c.alpha0;
      if (!(a0 > 0.5 && a0 < 1.0)) add("robustness", "alpha0 out of (1/2,1)");
      const double eta = std::min({a0 - 0.5, a0 / 3.0, (1.0 - a0) / 3.0});
      if (dmax >= eta) add("robustness", "delta " + fmt(dmax) + " outside the window (0, " + fmt(eta) + ")");
      if (c.nonlinearity == "power" && a0 - dmax > 0.5) {
        const double pa = exponent_table(c.dim, a0 - dmax).p_alpha;
        if (c.p >= pa) add("robustness", "p ≥ p_α = " + fmt(pa) + " at alpha0 - delta");
      }
      if (!(c.spacing > 0.0) || !(c.span >= c.spacing)) add("robustness", "need 0 < spacing <= span");
      if (!(c.burn > 0.0)) add("robustness", "burn must be positive");
      break;
    }
    case ScenarioKind::mollifier_suite:
      if (c.levels.empty()) add("mollifier", "levels must not be empty");
      for (double l : c.levels) {
        if (l != std::floor(l) || l < 0.0 || l > 30.0) add("mollifier", "levels must be integers in [0, 30]");
        else if (std::ldexp(1.0, static_cast<int>(l) + 1) > M_PI * c.modes / c.box_length)
          add("mollifier", "cutoff exceeds Nyquist (l = " + fmt(l) + ")");
      }
      if (c.ensemble < 1) add("mollifier", "ensemble must be positive");
      break;
    case ScenarioKind::picard_demo:
      if (c.picard_l < 0) add("dynamics", "picard_l must be non-negative");
      else if (std::ldexp(1.0, c.picard_l + 1) > M_PI * c.modes / c.box_length)
        add("mollifier", "cutoff exceeds Nyquist");
      if (c.picard_steps < 2) add("dynamics", "picard_steps must be at least 2");
      if (c.picard_pairs < 1) add("dynamics", "picard_pairs must be positive");
      break;
  }
  if (c.out.empty()) add("cli", "output directory must not be empty");
  return err;
}

ScenarioConfig parse_config(std::string_view text) {
  std::vector<std::string> err;
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      err.push_back("[cli] line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (seen.count(key)) {
      err.push_back("[cli] line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    seen[key] = lineno;
    entries.emplace_back(std::move(key), std::move(value));
  }

  std::optional<ScenarioKind> kind;
  for (const auto& [k, v] : entries) {
    if (k != "scenario") continue;
    kind = scenario_from(v);
    if (!kind) err.push_back("[cli] unknown scenario '" + v + "'");
  }
  if (!kind) {
    if (!seen.count("scenario")) err.push_back("[cli] missing key 'scenario'");
    throw ConfigError(err);
  }

  ScenarioConfig cfg = default_config(*kind);
  for (const auto& [k, v] : entries) {
    if (k == "scenario") continue;
    const Key* key = find_key(k);
    const std::string where = "line " + std::to_string(seen[k]) + ": ";
    if (!key) {
      err.push_back("[cli] " + where + "unknown key '" + k + "'");
      continue;
    }
    if (!applies(*key, *kind)) {
      err.push_back("[cli] " + where + "key '" + k + "' does not apply to scenario " +
                    std::string(scenario_name(*kind)));
      continue;
    }
    if (auto e = key->set(cfg, v)) err.push_back("[cli] " + where + k + ": " + *e);
  }
  auto v = validate_config(cfg);
  err.insert(err.end(), v.begin(), v.end());
  if (!err.empty()) throw ConfigError(err);
  return cfg;
}

nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  j["scenario"] = std::string(scenario_name(cfg.scenario));
  for (const auto& k : keys())
    if (applies(k, cfg.scenario)) j[k.name] = k.get(cfg);
  return j;
}

std::string config_to_text(const ScenarioConfig& cfg) {
  std::string out = "scenario = " + std::string(scenario_name(cfg.scenario)) + "\n";
  for (const auto& k : keys()) {
    if (!applies(k, cfg.scenario)) continue;
    const nlohmann::json v = k.get(cfg);
    std::string text;
    if (v.is_string()) {
      text = v.get<std::string>();
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) text += (i ? "," : "") + v[i].dump();
    } else {
      text = v.dump();
    }
    out += k.name + " = " + text + "\n";
  }
  return out;
}

}  // namespace fracdamp
