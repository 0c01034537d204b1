#include "fracdamp/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "fracdamp/csv.hpp"
#include "fracdamp/errors.hpp"
#include "fracdamp/spectral.hpp"

namespace fracdamp {

namespace {

Trajectory run_branch(const State& s0, const ModelParams& params, const IntegratorConfig& cfg, double T,
                      int stride) {
  ObserverSpec obs;
  obs.stride = stride;
  return integrate(s0, params, cfg, T, obs);
}

ModelParams with_alpha(const ModelParams& base, double alpha) {
  ModelParams p = base;
  p.alpha = alpha;
  return p;
}

}  // namespace

StabilityResult stability_experiment(const State& a, const State& b, const ModelParams& params,
                                     const IntegratorConfig& cfg, double T, int stride) {
  auto fa = std::async(std::launch::async, [&] { return run_branch(a, params, cfg, T, stride); });
  auto fb = std::async(std::launch::async, [&] { return run_branch(b, params, cfg, T, stride); });
  Trajectory ta, tb;
  bool failed = false;
  for (auto* job : {&fa, &fb}) {
    try {
      (job == &fa ? ta : tb) = job->get();
    } catch (const StateBlowUp&) {
      failed = true;
    }
  }
  if (failed) throw std::runtime_error("blow-up in one branch");

  StabilityResult r;
  for (std::size_t k = 0; k < ta.states.size(); ++k) {
    r.t.push_back(ta.states[k].t);
    r.distance.push_back(norm_H_minus(difference(ta.states[k], tb.states[k]), params.alpha));
  }
  const double d0 = r.distance.front();
  for (double d : r.distance) {
    const double q = d0 > 0.0 ? (d * d) / (d0 * d0) : 0.0;
    r.profile.push_back(q);
    r.C_of_T = std::max(r.C_of_T, q);
  }
  return r;
}

double multiplier_gap(const Field& v, double alpha1, double alpha2) {
  if (alpha1 == alpha2) return 0.0;
  const Field c = to_spectral(v);
  const Grid& g = c.grid();
  auto xi = g.xi_norm();
  auto xi2 = g.xi_squared();
  double sum = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (xi[n] == 0.0) continue;
    const double m = std::pow(xi[n], 2.0 * alpha1) - std::pow(xi[n], 2.0 * alpha2);
    sum += m * m / (1.0 + xi2[n]) * std::norm(c.data()[n]);
  }
  return std::sqrt(sum * std::pow(g.box_length(), g.dim()));
}

void validate(const SweepConfig& cfg) {
  std::string err;
  if (cfg.deltas.empty()) err += "deltas must not be empty; ";
  double max_delta = cfg.calibration_delta;
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    if (!(cfg.deltas[i] > 0.0)) err += "deltas must be positive; ";
    if (i > 0 && !(cfg.deltas[i] < cfg.deltas[i - 1])) err += "deltas must be strictly decreasing; ";
    max_delta = std::max(max_delta, cfg.deltas[i]);
  }
  if (!(cfg.calibration_delta > 0.0)) err += "calibration delta must be positive; ";
  for (double d : cfg.deltas)
    if (d == cfg.calibration_delta) err += "calibration delta must differ from the assertion deltas; ";
  if (!(cfg.alpha0 - max_delta > 0.5 && cfg.alpha0 + max_delta < 1.0))
    err += "alpha0 +- max delta must stay inside (1/2,1); ";
  const double eta = std::min({cfg.alpha0 - 0.5, cfg.alpha0 / 3.0, (1.0 - cfg.alpha0) / 3.0});
  if (!(max_delta < eta)) err += "max delta must stay below min{alpha0-1/2, alpha0/3, (1-alpha0)/3}; ";
  const int dim = cfg.model.grid().dim();
  if (cfg.model.nl.p >= exponent_table(dim, cfg.alpha0 - max_delta).p_alpha)
    err += "p must stay below p_alpha at alpha0 - max delta; ";
  if (!(cfg.T > 0.0)) err += "horizon T must be positive; ";
  if (cfg.stride < 1) err += "stride must be positive; ";
  if (!(cfg.calibration_safety >= 1.0)) err += "calibration safety must be >= 1; ";
  if (!err.empty()) throw std::invalid_argument(err.substr(0, err.size() - 2));
}

namespace {

double pair_distance(const State& a, const State& b, double gamma) {
  const State z = difference(a, b);
  return sobolev_norm(z.u, {.s = 1.0 - gamma}) + sobolev_norm(z.v, {.s = -gamma});
}

SweepRow compare_branch(double delta, const Trajectory& base, const Trajectory& other, const SweepConfig& cfg) {
  SweepRow row;
  row.delta = delta;
  const double alpha_n = cfg.alpha0 + delta;
  double integral = 0.0;
  double prev_gap2 = 0.0;
  for (std::size_t k = 0; k < base.states.size(); ++k) {
    const double t = base.states[k].t;
    const double gap = multiplier_gap(base.states[k].v, alpha_n, cfg.alpha0);
    if (k > 0) {
      const double h = t - row.t.back();
      const double growth = std::exp(cfg.duhamel_rate * h);
      integral = growth * integral + 0.5 * h * (growth * prev_gap2 + gap * gap);
    }
    prev_gap2 = gap * gap;
    row.t.push_back(t);
    row.distance.push_back(pair_distance(base.states[k], other.states[k], cfg.gamma));
    row.bound.push_back(integral);
    row.sup_distance = std::max(row.sup_distance, row.distance.back());
    row.duhamel_bound = std::max(row.duhamel_bound, integral);
  }
  return row;
}

double worst_ratio(const SweepRow& row, double K) {
  double worst = 0.0;
  for (std::size_t k = 0; k < row.t.size(); ++k) {
    const double d2 = row.distance[k] * row.distance[k];
    if (d2 == 0.0) continue;
    const double b = K * row.bound[k];
    worst = std::max(worst, b > 0.0 ? d2 / b : kInfinity);
  }
  return worst;
}

}  // namespace

SweepResult alpha_sweep(const SweepConfig& cfg) {
  validate(cfg);
  std::vector<double> alphas{cfg.alpha0, cfg.alpha0 + cfg.calibration_delta};
  for (double d : cfg.deltas) alphas.push_back(cfg.alpha0 + d);

  std::vector<std::future<Trajectory>> jobs;
  for (double a : alphas)
    jobs.push_back(std::async(std::launch::async, [&cfg, a] {
      return run_branch(cfg.data, with_alpha(cfg.model, a), cfg.cfg, cfg.T, cfg.stride);
    }));
  std::vector<Trajectory> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  SweepResult res;
  res.calibration = compare_branch(cfg.calibration_delta, runs[0], runs[1], cfg);
  double cal = 0.0;
  for (std::size_t k = 0; k < res.calibration.t.size(); ++k)
    if (res.calibration.bound[k] > 0.0)
      cal = std::max(cal, res.calibration.distance[k] * res.calibration.distance[k] / res.calibration.bound[k]);
  res.prefactor = cfg.calibration_safety * cal;
  res.calibration.worst_bound_ratio = worst_ratio(res.calibration, res.prefactor);

  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    SweepRow row = compare_branch(cfg.deltas[i], runs[0], runs[i + 2], cfg);
    row.worst_bound_ratio = worst_ratio(row, res.prefactor);
    res.rows.push_back(std::move(row));
  }

  res.distance_strictly_decreasing = true;
  res.bound_holds = true;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    if (i > 0 && !(res.rows[i].sup_distance < res.rows[i - 1].sup_distance)) res.distance_strictly_decreasing = false;
    if (!(res.rows[i].worst_bound_ratio <= 1.0)) res.bound_holds = false;
  }

  if (cfg.attractor_burn) {
    std::vector<std::future<AttractorSample>> samples;
    std::vector<double> sample_alphas{cfg.alpha0};
    for (double d : cfg.deltas) sample_alphas.push_back(cfg.alpha0 + d);
    for (double a : sample_alphas)
      samples.push_back(std::async(std::launch::async, [&cfg, a] {
        return attractor_sample(cfg.data, with_alpha(cfg.model, a), cfg.cfg, *cfg.attractor_burn,
                                cfg.attractor_span, cfg.attractor_spacing);
      }));
    std::vector<AttractorSample> clouds;
    for (auto& s : samples) clouds.push_back(s.get());
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      res.rows[i].semidistance = attractor_semidistance(clouds[i + 1], clouds[0], cfg.model.nl);
      if (i > 0 && res.rows[i].semidistance > res.rows[i - 1].semidistance) res.semidistance_nonincreasing = false;
    }
  }
  return res;
}

std::string sweep_table_header() { return "delta,sup_distance,duhamel_bound,semidistance,worst_bound_ratio"; }

std::string sweep_table_row(const SweepRow& r) {
  return csv_number(r.delta) + ',' + csv_number(r.sup_distance) + ',' + csv_number(r.duhamel_bound) + ',' +
         csv_number(r.semidistance) + ',' + csv_number(r.worst_bound_ratio);
}

// Attractor sampling -----------------------------------------------------------

AttractorSample attractor_sample(const State& s0, const ModelParams& params, const IntegratorConfig& cfg,
                                 double t_burn, double span, double spacing) {
  if (!(t_burn > 0.0) || !(span >= 0.0) || !(spacing > 0.0))
    throw std::invalid_argument("attractor sampling needs t_burn > 0, span >= 0, spacing > 0");
  const long long spacing_steps = std::llround(spacing / cfg.dt);
  if (spacing_steps < 1 || std::abs(spacing_steps * cfg.dt - spacing) > 1e-9 * spacing)
    throw std::invalid_argument("spacing must be a multiple of dt");

  const double half = 0.5 * t_burn;
  ObserverSpec obs;
  obs.stride = std::numeric_limits<int>::max();
  Trajectory first = integrate(s0, params, cfg, half, obs);
  Trajectory second = integrate(first.back(), params, cfg, t_burn - half, obs);
  const double n0 = norm_H(first.states.front(), params.nl);
  const double nh = norm_H(first.back(), params.nl);
  const double nb = norm_H(second.back(), params.nl);
  if (std::abs(nb - nh) > 0.05 * n0 + 1e-12) throw std::runtime_error("not yet absorbed");

  AttractorSample out;
  out.alpha = params.alpha;
  const double cap =
      2.0 * std::max(norm_H_alpha(second.back(), params.alpha), norm_H_alpha(first.states.front(), params.alpha));
  auto keep = [&](const State& s) {
    out.times.push_back(s.t);
    out.norm_H.push_back(norm_H(s, params.nl));
    out.norm_H_alpha.push_back(norm_H_alpha(s, params.alpha));
    if (out.norm_H_alpha.back() > cap) throw std::runtime_error("not yet absorbed");
    out.snapshots.push_back(s);
  };
  keep(second.back());
  if (span > 0.0) {
    ObserverSpec every;
    every.stride = static_cast<int>(spacing_steps);
    every.store = false;
    bool skip_first = true;
    every.callback = [&](const State& s) {
      if (skip_first) {
        skip_first = false;
        return;
      }
      keep(s);
    };
    integrate(second.back(), params, cfg, span, every);
  }
  for (std::size_t i = 0; i < out.snapshots.size(); ++i)
    for (std::size_t j = i + 1; j < out.snapshots.size(); ++j)
      out.diameter = std::max(out.diameter, norm_H(difference(out.snapshots[i], out.snapshots[j]), params.nl));
  return out;
}

double attractor_semidistance(const AttractorSample& A, const AttractorSample& B, const Nonlinearity& nl) {
  if (A.snapshots.empty() || B.snapshots.empty()) throw std::invalid_argument("empty attractor sample");
  double sup = 0.0;
  for (const auto& a : A.snapshots) {
    double inf = kInfinity;
    for (const auto& b : B.snapshots) inf = std::min(inf, norm_H(difference(a, b), nl));
    sup = std::max(sup, inf);
  }
  return sup;
}

Field cloud_mean(const AttractorSample& A) {
  if (A.snapshots.empty()) throw std::invalid_argument("empty attractor sample");
  Field mean = to_spectral(A.snapshots.front().u);
  for (std::size_t i = 1; i < A.snapshots.size(); ++i) mean += to_spectral(A.snapshots[i].u);
  mean *= 1.0 / static_cast<double>(A.snapshots.size());
  return mean;
}

double elliptic_residual(const Field& u, const ModelParams& params) {
  Field r = bessel_power(to_spectral(u), 2.0);
  if (!params.nl.is_zero()) r += dealias(to_spectral(eval_g(params.nl, u)));
  const Field f = to_spectral(params.forcing);
  r -= f;
  const double fn = sobolev_norm(f, {.s = -1.0});
  const double rn = sobolev_norm(r, {.s = -1.0});
  return fn > 0.0 ? rn / fn : rn;
}

}  // namespace fracdamp
