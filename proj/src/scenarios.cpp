#include "fracdamp/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "fracdamp/dynamics.hpp"
#include "fracdamp/energy.hpp"
#include "fracdamp/errors.hpp"
#include "fracdamp/mollifier.hpp"
#include "fracdamp/random_fields.hpp"
#include "fracdamp/robustness.hpp"
#include "fracdamp/spectral.hpp"
#include "fracdamp/tailcut.hpp"

namespace fracdamp {

bool ScenarioResult::passed() const {
  if (error) return false;
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed || !a.hard; });
}

const Assertion* ScenarioResult::find(const std::string& name) const {
  for (const auto& a : assertions)
    if (a.name == name) return &a;
  return nullptr;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Ctx {
  const ScenarioConfig& cfg;
  ScenarioResult& res;
  const ProgressFn& progress;
  std::string stage;

  void note(std::string s) {
    stage = std::move(s);
    if (progress) progress(stage);
  }

  void check(std::string name, bool passed, double value, std::string relation, double threshold,
             std::string detail = {}, bool hard = true) {
    res.assertions.push_back({std::move(name), passed, hard, value, std::move(relation), threshold, std::move(detail)});
  }
  void at_most(std::string name, double value, double threshold, std::string detail = {}, bool hard = true) {
    check(std::move(name), value <= threshold, value, "<=", threshold, std::move(detail), hard);
  }
  void below(std::string name, double value, double threshold, std::string detail = {}, bool hard = true) {
    check(std::move(name), value < threshold, value, "<", threshold, std::move(detail), hard);
  }
  void holds(std::string name, bool ok, std::string detail = {}, bool hard = true) {
    check(std::move(name), ok, ok ? 1.0 : 0.0, "true", 1.0, std::move(detail), hard);
  }
  void fit(const std::string& name, double v) { res.fitted_constants[name] = v; }
  void table(std::string file, CsvTable t) { res.tables.push_back({std::move(file), std::move(t)}); }
};

// Model and data builders ------------------------------------------------------

GridPtr grid_of(const ScenarioConfig& c, int modes = 0) {
  return make_grid(c.dim, c.box_length, modes > 0 ? modes : c.modes);
}

Nonlinearity nonlinearity_of(const ScenarioConfig& c) {
  return {c.p, c.c0, c.c1, c.nonlinearity == "saturating" ? NonlinearityForm::saturating : NonlinearityForm::power};
}

Field forcing_of(const ScenarioConfig& c, GridPtr g) {
  if (c.forcing == "bump") return compact_bump(g, c.forcing_amplitude, c.forcing_radius);
  if (c.forcing == "gaussian") return gaussian_bump(g, c.forcing_amplitude, c.forcing_radius);
  return Field(g);
}

ModelParams model_of(const ScenarioConfig& c, GridPtr g, double alpha, bool forced = true) {
  return ModelParams(alpha, nonlinearity_of(c), forced ? forcing_of(c, g) : Field(g));
}

IntegratorConfig integrator_of(const ScenarioConfig& c) {
  IntegratorConfig ic;
  ic.dt = c.dt;
  ic.scheme = c.scheme == "reference-rk4" ? Scheme::reference_rk4 : Scheme::duhamel_etd;
  ic.dealias = c.dealias;
  if (c.l_trunc >= 0) ic.l_trunc = c.l_trunc;
  return ic;
}

State data_of(const ScenarioConfig& c, GridPtr g) {
  if (c.data == "compact")
    return make_state(compact_bump(g, c.u0_amplitude, c.u0_width), compact_bump(g, c.u1_amplitude, c.u1_width));
  return make_state(gaussian_bump(g, c.u0_amplitude, c.u0_width), gaussian_bump(g, c.u1_amplitude, c.u1_width));
}

Trajectory evolve(const State& s0, const ModelParams& m, const IntegratorConfig& ic, double T,
                  const ObserverSpec& obs) {
  if (ic.l_trunc) return integrate_auxiliary(s0, m, *ic.l_trunc, ic, T, obs);
  return integrate(s0, m, ic, T, obs);
}

ObserverSpec every(int stride, std::function<void(const State&)> cb) {
  ObserverSpec o;
  o.stride = stride;
  o.store = false;
  o.callback = std::move(cb);
  return o;
}

bool near_multiple(double t, double step) {
  const double k = t / step;
  return std::abs(k - std::round(k)) < 1e-6;
}

// decay ---------------------------------------------------------------------------

void run_decay(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  const ModelParams free = model_of(c, g, c.alpha, false);
  const IntegratorConfig ic = integrator_of(c);
  const State s0 = data_of(c, g);
  const std::optional<int> l = ic.l_trunc;

  x.note("decay: unforced run to T = " + num(c.T));
  EnergySeries es;
  std::vector<double> tn, nh;
  auto rec = energy_recorder(free, es, l);
  long long idx = 0;
  const long long nsteps = std::llround(c.T / c.dt);
  evolve(s0, free, ic, c.T, every(1, [&](const State& s) {
           rec(s);
           if (idx % c.stride == 0 || idx == nsteps) {
             tn.push_back(s.t);
             nh.push_back(norm_H(s, free.nl));
           }
           ++idx;
         }));

  // Energy equality over [0, residual_T] at dt and dt/2.
  EnergySeries prefix;
  for (std::size_t i = 0; i < es.t.size() && es.t[i] <= c.residual_T + 1e-9; ++i) {
    prefix.t.push_back(es.t[i]);
    prefix.E.push_back(es.E[i]);
    prefix.D.push_back(es.D[i]);
  }
  const auto resid = energy_equality_residual(prefix);
  const double r1 = *std::max_element(resid.begin(), resid.end());

  x.note("decay: energy run at dt/2");
  IntegratorConfig half = ic;
  half.dt = 0.5 * ic.dt;
  EnergySeries es2;
  evolve(s0, free, half, c.residual_T, every(1, energy_recorder(free, es2, l)));
  const auto resid2 = energy_equality_residual(es2);
  const double r2 = *std::max_element(resid2.begin(), resid2.end());
  const double factor = r2 > 0.0 ? r1 / r2 : kInfinity;

  x.at_most("energy_residual", r1, 1e-4, "max normalized residual over [0, " + num(c.residual_T) + "]");
  x.check("residual_halving_factor", factor >= 3.0 && factor <= 5.0, factor, "in [3,5]", 4.0,
          "residual(dt) / residual(dt/2)");
  x.fit("energy_residual", r1);
  x.fit("energy_residual_half_dt", r2);
  x.fit("residual_factor", factor);

  CsvTable energy("fracdamp.decay_energy.v1", {"t", "E", "D", "residual"});
  for (std::size_t i = 0; i < es.t.size(); i += c.stride)
    energy.add_row({es.t[i], es.E[i], es.D[i], i < resid.size() ? resid[i] : kNaN});
  x.table("energy.csv", std::move(energy));

  x.note("decay: exponential fit");
  std::vector<double> ft, fe;
  for (std::size_t i = 0; i < es.t.size(); i += c.stride) {
    ft.push_back(es.t[i]);
    fe.push_back(es.E[i]);
  }
  const DecayFit fit = decay_fit(ft, fe);
  x.check("kappa_positive", fit.kappa > 0.0, fit.kappa, ">", 0.0, "fitted E(t) ~ A exp(-kappa t) + B");
  x.fit("kappa_fit", fit.kappa);
  x.fit("decay_amplitude", fit.amplitude);
  x.fit("decay_floor", fit.floor);
  x.fit("decay_fit_residual", fit.residual);
  const double ratio = nh.back() / nh.front();
  x.below("terminal_decay", ratio, 1e-3, "||(u,u_t)(T)||_H / ||(u,u_t)(0)||_H");

  // Absorbing ball under the configured forcing, from three data sets.
  x.note("decay: absorbing-ball runs");
  const ModelParams forced = model_of(c, g, c.alpha, true);
  std::vector<State> starts;
  starts.push_back(s0);
  starts.push_back(make_state(-2.0 * s0.u, -2.0 * s0.v));
  starts.push_back(make_state(gaussian_bump(g, 1.5, 2.0 * c.u0_width, {c.box_length / 8.0, 0, 0}), Field(g)));
  std::vector<std::future<std::vector<double>>> jobs;
  for (const auto& st : starts)
    jobs.push_back(std::async(std::launch::async, [&, st] {
      std::vector<double> out;
      long long k = 0;
      evolve(st, forced, ic, c.T, every(1, [&](const State& s) {
               if (k % c.stride == 0 || k == nsteps) out.push_back(norm_H(s, forced.nl));
               ++k;
             }));
      return out;
    }));
  std::vector<std::vector<double>> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  double tmax = 0.0, tmin = kInfinity, scale = 0.0;
  for (const auto& r : runs) {
    tmax = std::max(tmax, r.back());
    tmin = std::min(tmin, r.back());
    scale = std::max(scale, r.front());
  }
  const double spread = tmax > 1e-12 * scale ? (tmax - tmin) / tmax : 0.0;
  const double radius = 1.1 * tmax;
  double entry = 0.0;
  for (const auto& r : runs)
    for (std::size_t i = r.size(); i-- > 0;)
      if (r[i] > radius) {
        entry = std::max(entry, i + 1 < tn.size() ? tn[i + 1] : c.T);
        break;
      }
  x.below("ball_spread", spread, 0.2, "(max - min) / max of terminal H norms over three data sets");
  x.at_most("ball_entry_time", entry, 0.5 * c.T, "last time any run is outside 1.1 x the largest terminal norm");
  x.fit("ball_radius", radius);
  x.fit("ball_spread", spread);

  CsvTable norms("fracdamp.decay_norms.v1", {"t", "unforced", "forced_a", "forced_b", "forced_c"});
  for (std::size_t i = 0; i < tn.size(); ++i) norms.add_row({tn[i], nh[i], runs[0][i], runs[1][i], runs[2][i]});
  x.table("norms.csv", std::move(norms));
}

// smoothing -------------------------------------------------------------------------

void run_smoothing(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  const int fine = c.fine_modes > 0 ? c.fine_modes : 2 * c.modes;
  const IntegratorConfig ic = integrator_of(c);
  const double sample = c.stride * c.dt;

  std::vector<double> times;
  for (int k = -6; k <= 0; ++k) times.push_back(std::ldexp(1.0, k));
  for (double t : times)
    if (!near_multiple(t, sample)) throw std::invalid_argument("sample time " + num(t) + " is not a multiple of stride*dt");
  std::vector<double> late;
  for (double t = 1.0; t <= c.T + 1e-9; t += 1.0) late.push_back(t);

  struct Run {
    GridPtr grid;
    std::optional<ModelParams> params;
    Trajectory traj;
  };
  std::vector<Run> runs(2);
  runs[0].grid = grid_of(c);
  runs[1].grid = grid_of(c, fine);
  x.note("smoothing: runs at M = " + std::to_string(c.modes) + " and " + std::to_string(fine));
  std::vector<std::future<void>> jobs;
  for (auto& r : runs) {
    r.params.emplace(model_of(c, r.grid, c.alpha));
    jobs.push_back(std::async(std::launch::async, [&c, &ic, &r] {
      State s0 = data_of(c, r.grid);
      s0.v += rough_field(r.grid, c.rough_delta, c.rough_amplitude, c.seed);
      ObserverSpec obs;
      obs.stride = c.stride;
      r.traj = integrate(s0, *r.params, ic, c.T, obs);
    }));
  }
  for (auto& j : jobs) j.get();

  x.note("smoothing: report");
  std::vector<SmoothingRun> sr;
  for (const auto& r : runs) sr.push_back({&r.traj, &*r.params});
  const SmoothingReport rep = smoothing_report(sr, times, times.front());
  x.at_most("resolution_uniform", rep.resolution_spread, 2.0,
            "max over t in [1/64,1] of the M vs 2M ratio of t^2 ||u_t||^2_{H^alpha}");
  x.fit("resolution_spread", rep.resolution_spread);
  x.fit("small_t_exponent", rep.small_t_exponent);
  x.fit("c_alpha", rep.c_alpha);

  CsvTable tab("fracdamp.smoothing.v1", {"modes", "t", "weighted_ut", "weighted_utt", "u_H1alpha", "weighted_H3"});
  for (const auto& row : rep.rows)
    tab.add_row({double(row.modes), row.t, row.weighted_ut, row.weighted_utt, row.u_H1alpha, row.weighted_H3});
  x.table("smoothing.csv", std::move(tab));

  // Late-time H^{1+alpha} norm on both resolutions.
  CsvTable lt("fracdamp.smoothing_late.v1", {"t", "u_H1alpha_M", "u_H1alpha_2M", "relative_gap"});
  bool finite = true;
  double worst = 0.0;
  for (double t : late) {
    double v[2];
    for (int i = 0; i < 2; ++i) {
      const State* best = &runs[i].traj.states.front();
      for (const auto& s : runs[i].traj.states)
        if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
      v[i] = sobolev_norm(best->u, {.s = 1.0 + c.alpha});
      finite = finite && std::isfinite(v[i]);
    }
    const double gap = std::abs(v[0] - v[1]) / std::max(v[0], v[1]);
    worst = std::max(worst, std::isfinite(gap) ? gap : (v[0] == v[1] ? 0.0 : kInfinity));
    lt.add_row({t, v[0], v[1], gap});
  }
  x.holds("H1alpha_finite", finite, "||u(t)||_{H^{1+alpha}} finite for t = 1..T");
  x.at_most("H1alpha_resolution_stable", worst, 0.1, "max relative M vs 2M gap of ||u(t)||_{H^{1+alpha}}, t >= 1");
  x.table("late.csv", std::move(lt));
}

// tail ------------------------------------------------------------------------------

void run_tail(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  const ModelParams m = model_of(c, g, c.alpha);
  x.note("tail: calibrating epsilon");
  const LyapunovParams lp = calibrate_epsilon(m, c.seed);
  x.fit("epsilon", lp.epsilon);
  x.note("tail: run to T = " + num(c.T));
  const TailExperiment ex = tail_smallness_experiment(data_of(c, g), m, integrator_of(c), c.radii, c.T, c.psi_delta, lp);
  std::string col;
  for (const auto& r : ex.rows) col += (col.empty() ? "" : ", ") + num(r.tail_norm);
  x.holds("tail_strictly_decreasing", ex.strictly_decreasing, "tail norms outside 2R: " + col);
  x.fit("tail_fit_constant", ex.fit_constant);
  x.fit("tail_fit_residual", ex.fit_residual);
  CsvTable tab("fracdamp.tail.v1", {"R", "tail_norm", "predicted_bound", "f_tail", "shape", "H4_initial", "H4_final"});
  for (const auto& r : ex.rows) tab.add_row({r.R, r.tail_norm, r.predicted_bound, r.f_tail, r.shape, r.H4_initial, r.H4_final});
  x.table("tail.csv", std::move(tab));
}

// stability ---------------------------------------------------------------------------

void run_stability(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  const ModelParams m = model_of(c, g, c.alpha);
  const IntegratorConfig ic = integrator_of(c);
  const State a = data_of(c, g);
  std::mt19937_64 rng(c.seed);
  const double kmax = g->nyquist() / 4.0;
  State w = make_state(random_band_limited(g, kmax, 1.0, rng), random_band_limited(g, kmax, 1.0, rng));
  const double wn = norm_H_minus(w, c.alpha);
  w.u *= 1.0 / wn;
  w.v *= 1.0 / wn;
  const double T = *std::max_element(c.horizons.begin(), c.horizons.end());

  auto perturbed = [&](double lambda) { return make_state(a.u + lambda * w.u, a.v + lambda * w.v); };
  x.note("stability: lambda = " + num(c.perturbation));
  const StabilityResult r1 = stability_experiment(a, perturbed(c.perturbation), m, ic, T, c.stride);
  x.note("stability: lambda = " + num(0.5 * c.perturbation));
  const StabilityResult r2 = stability_experiment(a, perturbed(0.5 * c.perturbation), m, ic, T, c.stride);

  bool finite = true;
  for (double h : c.horizons) {
    double sup = 0.0;
    for (std::size_t k = 0; k < r1.t.size(); ++k)
      if (r1.t[k] <= h + 1e-9) sup = std::max(sup, r1.profile[k]);
    finite = finite && std::isfinite(sup);
    x.fit("C(" + num(h) + ")", sup);
  }
  x.holds("C_finite", finite, "sup_t ||z(t)||^2 / ||z(0)||^2 in H_{-alpha} finite at every horizon");

  double worst = 0.0;
  CsvTable tab("fracdamp.stability.v1", {"t", "distance", "distance_half", "ratio"});
  for (std::size_t k = 0; k < r1.t.size(); ++k) {
    const double q = r1.distance[k] / r2.distance[k];
    worst = std::max(worst, std::abs(q - 2.0) / 2.0);
    tab.add_row({r1.t[k], r1.distance[k], r2.distance[k], q});
  }
  x.at_most("perturbation_linearity", worst, 0.1, "max_t |d_lambda / d_{lambda/2} - 2| / 2");
  x.fit("linearity_defect", worst);
  x.table("stability.csv", std::move(tab));
}

// alpha-sweep -------------------------------------------------------------------------

void run_alpha_sweep(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  SweepConfig sc(data_of(c, g), model_of(c, g, c.alpha0));
  sc.alpha0 = c.alpha0;
  sc.deltas = c.deltas;
  sc.calibration_delta = c.calibration_delta;
  sc.cfg = integrator_of(c);
  sc.T = c.T;
  sc.stride = c.stride;
  sc.attractor_burn = c.burn;
  sc.attractor_span = c.span;
  sc.attractor_spacing = c.spacing;
  x.note("alpha-sweep: " + std::to_string(c.deltas.size() + 2) + " branches");
  const SweepResult r = alpha_sweep(sc);

  std::string col;
  for (const auto& row : r.rows) col += (col.empty() ? "" : ", ") + num(row.sup_distance);
  x.holds("distance_strictly_decreasing", r.distance_strictly_decreasing, "sup_t distance per delta: " + col);
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.worst_bound_ratio);
  x.at_most("duhamel_bound_pointwise", worst, 1.0, "max_t distance^2 / (K x Duhamel integral)");
  x.holds("semidistance_nonincreasing", r.semidistance_nonincreasing, "attractor-sample semidistance per delta");
  x.fit("prefactor_K", r.prefactor);
  x.fit("calibration_delta", c.calibration_delta);

  CsvTable tab("fracdamp.alpha_sweep.v1",
               {"delta", "sup_distance", "duhamel_bound", "worst_bound_ratio", "semidistance"});
  CsvTable prof("fracdamp.alpha_sweep_profiles.v1", {"delta", "t", "distance", "bound"});
  auto emit = [&](const SweepRow& row) {
    tab.add_row({row.delta, row.sup_distance, row.duhamel_bound, row.worst_bound_ratio, row.semidistance});
    for (std::size_t k = 0; k < row.t.size(); ++k) prof.add_row({row.delta, row.t[k], row.distance[k], row.bound[k]});
  };
  emit(r.calibration);
  for (const auto& row : r.rows) emit(row);
  x.table("sweep.csv", std::move(tab));
  x.table("profiles.csv", std::move(prof));
}

// commutator-suite ----------------------------------------------------------------------

void run_commutator(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g1 = grid_of(c);
  GridPtr g2 = grid_of(c, 2 * c.modes);
  const double kmax = g1->nyquist() / 4.0;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> rough(0.1, 2.0), logamp(-1.0, 1.0);

  struct Pair {
    Field a1, b1, a2, b2;
  };
  x.note("commutator-suite: building " + std::to_string(c.ensemble) + " pairs");
  std::vector<Pair> pairs;
  for (int i = 0; i < c.ensemble; ++i) {
    const double da = rough(rng), db = rough(rng);
    const double aa = std::pow(10.0, logamp(rng)), ab = std::pow(10.0, logamp(rng));
    const std::uint64_t sa = c.seed * 7919 + 2 * i, sb = sa + 1;
    pairs.push_back({band_limit(rough_field(g1, da, aa, sa), kmax), band_limit(rough_field(g1, db, ab, sb), kmax),
                     band_limit(rough_field(g2, da, aa, sa), kmax), band_limit(rough_field(g2, db, ab, sb), kmax)});
  }

  std::vector<CommutatorExponents> combos;
  for (double s : {0.3, 0.5, 0.7}) {
    combos.push_back({s, 2.0, 4.0, 4.0, s, 0.0});
    combos.push_back({s, 2.0, 4.0, 4.0, 0.0, s});
    combos.push_back({s, 2.0, 4.0, 4.0, 0.5 * s, 0.5 * s});
    combos.push_back({s, 2.0, kInfinity, 2.0, 0.0, s});
  }
  x.note("commutator-suite: ratio ensembles");
  std::vector<std::future<std::array<double, 3>>> jobs;
  for (const auto& e : combos)
    jobs.push_back(std::async(std::launch::async, [&pairs, e] {
      double m1 = 0.0, m2 = 0.0, mean = 0.0;
      for (const auto& p : pairs) {
        const double r1 = commutator_defect(p.a1, p.b1, e).ratio;
        m1 = std::max(m1, r1);
        m2 = std::max(m2, commutator_defect(p.a2, p.b2, e).ratio);
        mean += r1;
      }
      return std::array<double, 3>{m1, m2, mean / pairs.size()};
    }));
  CsvTable tab("fracdamp.commutator.v1", {"s", "s1", "s2", "p", "p1", "p2", "max_ratio_M", "max_ratio_2M", "mean_ratio_M"});
  bool finite = true;
  double worst = 1.0;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto r = jobs[i].get();
    const auto& e = combos[i];
    finite = finite && std::isfinite(r[0]) && std::isfinite(r[1]) && r[0] > 0.0 && r[1] > 0.0;
    worst = std::max(worst, std::max(r[0], r[1]) / std::min(r[0], r[1]));
    tab.add_row({e.s, e.s1, e.s2, e.p, e.p1, e.p2, r[0], r[1], r[2]});
  }
  x.holds("ratios_finite", finite, "every ensemble maximum finite and positive");
  x.at_most("ratio_resolution_stability", worst, 2.0, "max over exponent sets of max/min of the M and 2M maxima");
  x.fit("ratio_resolution_spread", worst);
  x.table("commutator.csv", std::move(tab));

  x.note("commutator-suite: homogeneity");
  double homog = 0.0;
  const CommutatorExponents e0{};
  for (int i = 0; i < std::min<int>(10, pairs.size()); ++i) {
    const auto& p = pairs[i];
    const double base = commutator_defect(p.a1, p.b1, e0).defect_norm;
    const double sa = commutator_defect(3.0 * p.a1, p.b1, e0).defect_norm;
    const double sb = commutator_defect(p.a1, -0.5 * p.b1, e0).defect_norm;
    homog = std::max({homog, std::abs(sa - 3.0 * base) / (3.0 * base), std::abs(sb - 0.5 * base) / (0.5 * base)});
  }
  x.at_most("homogeneity", homog, 1e-12, "relative defect change under a -> 3a and b -> -b/2");
  x.fit("homogeneity_defect", homog);

  x.note("commutator-suite: cut-off scaling");
  std::vector<CutoffPsi> psis;
  for (double R : c.radii) psis.push_back(build_psi(g1, R, c.psi_delta));
  CsvTable ps("fracdamp.psi_scaling.v1", {"R", "riesz_scaled", "gradient_scaled"});
  double rlo = kInfinity, rhi = 0.0, glo = kInfinity, ghi = 0.0;
  const double q = 2.0 * c.dim / c.alpha;
  for (const auto& psi : psis) {
    const double rz = psi_riesz_norm_check(psi, c.alpha, q);
    double gmax = 0.0;
    for (const auto& v : psi.grad_norm.data()) gmax = std::max(gmax, v.real());
    const double gs = psi.R * gmax;
    rlo = std::min(rlo, rz);
    rhi = std::max(rhi, rz);
    glo = std::min(glo, gs);
    ghi = std::max(ghi, gs);
    ps.add_row({psi.R, rz, gs});
  }
  x.at_most("psi_riesz_scaling", rhi / rlo, 2.0, "max/min over R of ||psi||_{Hdot^{alpha,2N/alpha}} R^{alpha/2}");
  x.at_most("psi_gradient_scaling", ghi / glo - 1.0, 0.1, "relative spread over R of R max|grad psi|");
  x.table("psi.csv", std::move(ps));

  x.note("commutator-suite: cut-off inequality calibration");
  auto sample_field = [&](std::mt19937_64& r) {
    std::uniform_real_distribution<double> amp(0.2, 2.0), width(0.5, 8.0), centre(-0.25 * c.box_length, 0.25 * c.box_length);
    Field u = gaussian_bump(g1, amp(r), width(r), {centre(r), 0.0, 0.0});
    u += random_band_limited(g1, g1->nyquist() / 4.0, 0.1 * amp(r), r);
    return u;
  };
  const int half = std::max(2, c.ensemble / 2);
  std::vector<Field> cal_fields, held_fields;
  std::vector<const CutoffPsi*> cal_psis, held_psis;
  std::mt19937_64 cal_rng(c.seed + 101), held_rng(c.seed + 202);
  for (int i = 0; i < half; ++i) {
    cal_fields.push_back(sample_field(cal_rng));
    cal_psis.push_back(&psis[i % psis.size()]);
    held_fields.push_back(sample_field(held_rng));
    held_psis.push_back(&psis[(i + 1) % psis.size()]);
  }
  const double C = calibrate_cutoff_inequality(cal_fields, cal_psis, c.alpha);
  double margin = kInfinity;
  for (std::size_t i = 0; i < held_fields.size(); ++i) {
    const CutoffInequalityTerms t = cutoff_inequality_check(held_fields[i], *held_psis[i], c.alpha, C);
    margin = std::min(margin, t.margin / t.rhs);
  }
  x.check("cutoff_inequality_margin", margin >= 0.0, margin, ">=", 0.0,
          "min relative margin on the held-out ensemble with C frozen");
  x.fit("cutoff_constant_C", C);
}

// mollifier-suite -----------------------------------------------------------------------

void run_mollifier(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  std::mt19937_64 rng(c.seed);
  std::vector<Field> fields;
  x.note("mollifier-suite: ensemble of " + std::to_string(c.ensemble));
  for (int i = 0; i < c.ensemble + 1; ++i) fields.push_back(to_spectral(random_band_limited(g, g->nyquist(), 1.0, rng)));

  CsvTable tab("fracdamp.mollifier.v1", {"level", "selfadjoint_defect", "max_mode_gain", "max_norm_gain", "kernel_l1"});
  double worst_defect = 0.0, worst_gain = 0.0, worst_norm = 0.0;
  for (double lv : c.levels) {
    const int l = static_cast<int>(lv);
    double defect = 0.0, gain = 0.0, ngain = 0.0;
    for (int i = 0; i < c.ensemble; ++i) {
      defect = std::max(defect, sl_selfadjoint_defect(fields[i], fields[i + 1], l));
      const Field s = apply_Sl(fields[i], l);
      for (std::size_t n = 0; n < s.size(); ++n) {
        const double in = std::abs(fields[i].data()[n]);
        if (in > 0.0) gain = std::max(gain, std::abs(s.data()[n]) / in);
      }
      for (double m : {-1.0, 0.0, 1.0, 2.0})
        ngain = std::max(ngain, sobolev_norm(s, {.s = m}) / sobolev_norm(fields[i], {.s = m}));
    }
    const double k1 = kernel_l1_norm(g, l);
    worst_defect = std::max(worst_defect, defect);
    worst_gain = std::max(worst_gain, gain);
    worst_norm = std::max(worst_norm, ngain);
    x.fit("kernel_l1_l" + std::to_string(l), k1);
    tab.add_row({double(l), defect, gain, ngain, k1});
  }
  x.at_most("selfadjoint_defect", worst_defect, 1e-12, "max |(S_l f, g) - (f, S_l g)| / (||f|| ||g||)");
  x.at_most("mode_contraction", worst_gain, 1.0, "max per-mode |S_l f|_k / |f|_k (no tolerance)");
  x.at_most("sobolev_contraction", worst_norm, 1.0, "max ||S_l f||_{H^m} / ||f||_{H^m}, m in {-1,0,1,2}");
  x.table("mollifier.csv", std::move(tab));

  // Convergence curve for a field band-limited at |xi| <= 8.
  const double K = 8.0;
  const Field f = band_limit(fields.front(), K);
  std::vector<int> levels;
  for (int l = 0; l <= 6; ++l) levels.push_back(l);
  const auto curve = sl_convergence_curve(f, 1.0, levels);
  bool ok = true;
  CsvTable cv("fracdamp.mollifier_convergence.v1", {"level", "residual_H1"});
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const bool covers = std::ldexp(1.0, levels[i]) >= K;
    ok = ok && (covers ? curve[i] == 0.0 : curve[i] > 0.0);
    cv.add_row({double(levels[i]), curve[i]});
  }
  x.holds("convergence_hits_zero", ok, "||S_l f - f||_{H^1} = 0 exactly once 2^l >= 8, positive before");
  x.table("convergence.csv", std::move(cv));
}

// picard-demo ----------------------------------------------------------------------------

void run_picard(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  const ModelParams m = model_of(c, g, c.alpha);
  PicardOptions opt;
  opt.steps = c.picard_steps;
  opt.pairs = c.picard_pairs;
  opt.seed = c.seed;
  opt.dealias = c.dealias;
  x.note("picard-demo: l = " + std::to_string(c.picard_l) + ", T = " + num(c.T));
  const PicardReport r = picard_contraction_demo(data_of(c, g), m, c.picard_l, c.T, opt);
  x.below("contraction_factor", r.contraction_ratio, 1.0, r.status);
  x.holds("picard_converged", r.converged, std::to_string(r.iterations) + " iterations");
  x.at_most("fixed_point_vs_integrator", r.deviation_from_integrator, 1e-6,
            "max_t relative X_alpha gap between the Picard fixed point and the integrator");
  x.fit("contraction_factor", r.contraction_ratio);
  x.fit("iterations", r.iterations);
  x.fit("deviation_from_integrator", r.deviation_from_integrator);
  CsvTable pr("fracdamp.picard_pairs.v1", {"pair", "ratio"});
  for (std::size_t i = 0; i < r.pair_ratios.size(); ++i) pr.add_row({double(i), r.pair_ratios[i]});
  x.table("pairs.csv", std::move(pr));
  CsvTable it("fracdamp.picard_iterates.v1", {"iteration", "increment"});
  for (std::size_t i = 0; i < r.iterate_increments.size(); ++i) it.add_row({double(i + 1), r.iterate_increments[i]});
  x.table("iterates.csv", std::move(it));
}

// attractor-compare -----------------------------------------------------------------------

void run_attractor(Ctx& x) {
  const ScenarioConfig& c = x.cfg;
  GridPtr g = grid_of(c);
  const IntegratorConfig ic = integrator_of(c);
  const State s0 = data_of(c, g);
  std::vector<double> alphas{c.alpha0};
  for (double d : c.deltas) alphas.push_back(c.alpha0 + d);
  x.note("attractor-compare: sampling " + std::to_string(alphas.size()) + " attractors");
  std::vector<std::future<AttractorSample>> jobs;
  for (double a : alphas)
    jobs.push_back(std::async(std::launch::async, [&, a] {
      return attractor_sample(s0, model_of(c, g, a), ic, c.burn, c.span, c.spacing);
    }));
  std::vector<AttractorSample> clouds;
  for (auto& j : jobs) clouds.push_back(j.get());

  const ModelParams base = model_of(c, g, c.alpha0);
  CsvTable tab("fracdamp.attractor.v1", {"alpha", "delta", "semidistance", "diameter", "mean_norm_H", "elliptic_residual"});
  bool finite = true, monotone = true;
  double prev = kInfinity;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const double d = i == 0 ? 0.0 : c.deltas[i - 1];
    const double sd = i == 0 ? 0.0 : attractor_semidistance(clouds[i], clouds[0], base.nl);
    if (i > 0) {
      finite = finite && std::isfinite(sd);
      if (sd > prev) monotone = false;
      prev = sd;
    }
    double mean = 0.0;
    for (double v : clouds[i].norm_H) mean += v / clouds[i].norm_H.size();
    const double er = elliptic_residual(cloud_mean(clouds[i]), model_of(c, g, alphas[i]));
    tab.add_row({alphas[i], d, sd, clouds[i].diameter, mean, er});
    if (i == 0) x.fit("elliptic_residual_alpha0", er);
    x.fit("diameter_alpha" + num(alphas[i]), clouds[i].diameter);
  }
  x.holds("semidistance_finite", finite, "sup_a inf_b ||a - b||_H per delta");
  x.holds("semidistance_nonincreasing", monotone, "semidistance shrinks as delta decreases");
  const double er0 = x.res.fitted_constants["elliptic_residual_alpha0"];
  x.at_most("cloud_mean_near_equilibrium", er0, 0.05, "||(I - Delta)u + g(u) - f||_{H^-1} / ||f||_{H^-1} at the cloud mean",
            false);
  x.table("attractor.csv", std::move(tab));
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const ProgressFn& progress) {
  ScenarioResult res;
  res.scenario = std::string(scenario_name(cfg.scenario));
  Ctx x{cfg, res, progress, "validation"};
  auto fail = [&](std::string kind, const std::exception& e) {
    res.error = ScenarioError{std::move(kind), e.what(), x.stage};
  };
  try {
    if (auto errs = validate_config(cfg); !errs.empty()) throw ConfigError(errs);
    switch (cfg.scenario) {
      case ScenarioKind::decay: run_decay(x); break;
      case ScenarioKind::smoothing: run_smoothing(x); break;
      case ScenarioKind::tail: run_tail(x); break;
      case ScenarioKind::stability: run_stability(x); break;
      case ScenarioKind::alpha_sweep: run_alpha_sweep(x); break;
      case ScenarioKind::commutator_suite: run_commutator(x); break;
      case ScenarioKind::mollifier_suite: run_mollifier(x); break;
      case ScenarioKind::picard_demo: run_picard(x); break;
      case ScenarioKind::attractor_compare: run_attractor(x); break;
    }
  } catch (const ConfigError& e) {
    fail("config", e);
  } catch (const StateBlowUp& e) {
    fail("state-blow-up", e);
  } catch (const FitFailed& e) {
    fail("fit-failed", e);
  } catch (const std::invalid_argument& e) {
    fail(std::string_view(e.what()).starts_with("integrator failure") ? "integrator-failure" : "invalid-argument", e);
  } catch (const std::exception& e) {
    fail("runtime-error", e);
  }
  return res;
}

nlohmann::json summary_json(const ScenarioConfig& cfg, const ScenarioResult& r, std::optional<double> wall_time) {
  using nlohmann::json;
  json j;
  j["schema"] = "fracdamp.summary.v1";
  j["scenario"] = r.scenario;
  j["status"] = r.error ? "error" : (r.passed() ? "pass" : "fail");
  j["params"] = config_to_json(cfg);
  json as = json::array();
  for (const auto& a : r.assertions)
    as.push_back({{"name", a.name},
                  {"passed", a.passed},
                  {"hard", a.hard},
                  {"value", a.value},
                  {"relation", a.relation},
                  {"threshold", a.threshold},
                  {"detail", a.detail}});
  j["assertions"] = as;
  j["fitted_constants"] = json::object();
  for (const auto& [k, v] : r.fitted_constants) j["fitted_constants"][k] = v;
  json files = json::array();
  for (const auto& t : r.tables) files.push_back(t.file);
  j["tables"] = files;
  if (r.error)
    j["error"] = {{"kind", r.error->kind}, {"message", r.error->message}, {"stage", r.error->stage}};
  else
    j["error"] = nullptr;
  j["wall_time"] = wall_time ? json(*wall_time) : json(nullptr);
  return j;
}

void write_artifacts(const std::filesystem::path& dir, const ScenarioConfig& cfg, const ScenarioResult& result,
                     std::optional<double> wall_time) {
  std::filesystem::create_directories(dir);
  for (const auto& t : result.tables) t.table.write_file(dir / t.file);
  std::ofstream os(dir / "summary.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  os << summary_json(cfg, result, wall_time).dump(2) << '\n';
}

}  // namespace fracdamp
