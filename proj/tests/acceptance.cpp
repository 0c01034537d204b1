// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fracdamp/config.hpp"
#include "fracdamp/dynamics.hpp"
#include "fracdamp/scenarios.hpp"
#include "oracles.hpp"

using namespace fracdamp;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

State to_spectral_state(const State& s) { return make_state(to_spectral(s.u), to_spectral(s.v), s.t); }

Outcome spectral_exactness() {
  const int M = 256;
  auto g = make_grid(1, 40.0, M);
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> slot(1, M / 2 - 1);
  std::uniform_real_distribution<double> alpha_dist(0.55, 0.95);
  std::normal_distribution<double> nd;
  const double alpha = alpha_dist(rng);
  const ModelParams m(g, alpha, Nonlinearity::none());

  State s = zero_state(g);
  s.u = Field(g, Representation::spectral);
  s.v = Field(g, Representation::spectral);
  std::vector<int> picked;
  while (picked.size() < 50) {
    const int j = slot(rng);
    if (std::find(picked.begin(), picked.end(), j) != picked.end()) continue;
    picked.push_back(j);
    const cplx u{nd(rng), nd(rng)}, v{nd(rng), nd(rng)};
    s.u.data()[j] = u;
    s.u.data()[M - j] = std::conj(u);
    s.v.data()[j] = v;
    s.v.data()[M - j] = std::conj(v);
  }
  auto mode_error = [&](const State& got, const State& want, int j) {
    const double d = std::sqrt(std::norm(got.u.data()[j] - want.u.data()[j]) + std::norm(got.v.data()[j] - want.v.data()[j]));
    const double n = std::sqrt(std::norm(want.u.data()[j]) + std::norm(want.v.data()[j]));
    return d / n;
  };

  double closed_form = 0.0;
  for (double t : {0.013, 0.5, 2.75}) {
    const State r = to_spectral_state(linear_semigroup_step(s, m, t));
    for (int j : picked) {
      const double xi = g->xi_norm()[j];
      const auto E = oracle::exp2x2(mode_damping(xi, alpha), mode_stiffness(xi), t);
      const cplx u0 = s.u.data()[j], v0 = s.v.data()[j];
      const cplx ue = E[0] * u0 + E[1] * v0, ve = E[2] * u0 + E[3] * v0;
      const double d = std::sqrt(std::norm(r.u.data()[j] - ue) + std::norm(r.v.data()[j] - ve));
      closed_form = std::max(closed_form, d / std::sqrt(std::norm(ue) + std::norm(ve)));
    }
  }
  double semigroup = 0.0;
  for (auto [t1, t2] : {std::pair{0.2, 0.3}, std::pair{1.0, 2.5}, std::pair{0.001, 0.7}}) {
    const State two = to_spectral_state(linear_semigroup_step(linear_semigroup_step(s, m, t1), m, t2));
    const State one = to_spectral_state(linear_semigroup_step(s, m, t1 + t2));
    for (int j : picked) semigroup = std::max(semigroup, mode_error(two, one, j));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "closed-form rel err %.2e, semigroup rel err %.2e (tol 1e-10)", closed_form,
                semigroup);
  return {closed_form <= 1e-10 && semigroup <= 1e-10, buf};
}

std::string describe(const Assertion& a) {
  char buf[96];
  if (a.relation == "true")
    std::snprintf(buf, sizeof buf, "%s=%s", a.name.c_str(), a.passed ? "true" : "false");
  else
    std::snprintf(buf, sizeof buf, "%s=%.3g", a.name.c_str(), a.value);
  return buf;
}

/// Runs the scenario at its default configuration and requires every listed
/// assertion to be present and passing.
std::function<Outcome()> scenario_check(ScenarioKind kind, std::vector<std::string> names) {
  return [kind, names] {
    const ScenarioResult r = run_scenario(default_config(kind));
    if (r.error) return Outcome{false, r.error->kind + " in " + r.error->stage + ": " + r.error->message};
    Outcome o{true, ""};
    for (const auto& n : names) {
      const Assertion* a = r.find(n);
      if (!a) {
        o.passed = false;
        o.detail += n + "=missing ";
        continue;
      }
      o.passed = o.passed && a->passed;
      o.detail += describe(*a) + (a->passed ? " " : "(FAIL) ");
    }
    return o;
  };
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "spectral exactness", 1.0, spectral_exactness},
      {"AC2", "mollifier suite", 10.0,
       scenario_check(ScenarioKind::mollifier_suite,
                      {"selfadjoint_defect", "mode_contraction", "sobolev_contraction", "convergence_hits_zero"})},
      {"AC3", "energy equality", 120.0,
       scenario_check(ScenarioKind::decay, {"energy_residual", "residual_halving_factor"})},
      {"AC4", "dissipativity", 300.0,
       scenario_check(ScenarioKind::decay, {"kappa_positive", "terminal_decay", "ball_spread", "ball_entry_time"})},
      {"AC5", "smoothing", 300.0,
       scenario_check(ScenarioKind::smoothing,
                      {"resolution_uniform", "H1alpha_finite", "H1alpha_resolution_stable"})},
      {"AC6", "tail smallness", 300.0, scenario_check(ScenarioKind::tail, {"tail_strictly_decreasing"})},
      {"AC7", "commutator suite", 120.0,
       scenario_check(ScenarioKind::commutator_suite,
                      {"ratios_finite", "ratio_resolution_stability", "homogeneity", "psi_riesz_scaling",
                       "psi_gradient_scaling", "cutoff_inequality_margin"})},
      {"AC8", "stability", 300.0, scenario_check(ScenarioKind::stability, {"C_finite", "perturbation_linearity"})},
      {"AC9", "alpha robustness", 600.0,
       [] {
         Outcome sweep = scenario_check(ScenarioKind::alpha_sweep,
                                        {"distance_strictly_decreasing", "duhamel_bound_pointwise",
                                         "semidistance_nonincreasing"})();
         Outcome cloud =
             scenario_check(ScenarioKind::attractor_compare, {"semidistance_finite", "semidistance_nonincreasing"})();
         return Outcome{sweep.passed && cloud.passed, "sweep: " + sweep.detail + "| clouds: " + cloud.detail};
       }},
      {"AC10", "picard demo", 60.0,
       scenario_check(ScenarioKind::picard_demo,
                      {"contraction_factor", "picard_converged", "fixed_point_vs_integrator"})},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool ok = o.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s %-5s %-18s %7.2fs (limit %gs%s) %s\n", ok ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), secs,
                c.time_limit, in_time ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
