#include "fracdamp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fracdamp/csv.hpp"
#include "fracdamp/errors.hpp"
#include "fracdamp/mollifier.hpp"
#include "fracdamp/random_fields.hpp"
#include "fracdamp/spectral.hpp"
#include "fracdamp/tailcut.hpp"

namespace fracdamp {

namespace {

double hsq(const Field& f, double s) {
  const double n = sobolev_norm(f, {.s = s, .homogeneous = true});
  return n * n;
}

double nsq(const Field& f, double s) {
  const double n = sobolev_norm(f, {.s = s});
  return n * n;
}

Field maybe_Sl(const Field& f, std::optional<int> l) { return l ? apply_Sl(f, *l) : f; }

// Pieces shared by H and Phi so the probe ensemble evaluates each once.
struct Parts {
  double energy;       // E
  double cross;        // (u, v)
  double u_alpha;      // ||u||_{Hdot^alpha}^2 + ||u||^2
  double v_diss;       // ||v||_{Hdot^alpha}^2 + ||v||^2
  double v_l2;         // ||v||^2
  double u_work;       // ||u||_{Hdot^1}^2 + ||u||^2 + (g(u), u) - (f, u)
};

Parts parts(const State& s, const ModelParams& p, std::optional<int> l) {
  const Field u = to_spectral(s.u);
  const Field v = to_spectral(s.v);
  const Field ue = maybe_Sl(u, l);
  const Field fe = maybe_Sl(p.forcing, l);
  const double v2 = hsq(v, 0.0);
  const double u2 = hsq(u, 0.0);
  const double u1 = hsq(u, 1.0);
  const double fu = inner(fe, u);
  Parts r{};
  r.energy = 0.5 * (v2 + u1 + u2) + eval_G(p.nl, ue) - fu;
  r.cross = inner(u, v);
  r.u_alpha = hsq(u, p.alpha) + u2;
  r.v_diss = hsq(v, p.alpha) + v2;
  r.v_l2 = v2;
  const double gu = p.nl.is_zero() ? 0.0 : inner(eval_g(p.nl, ue), to_real(ue));
  r.u_work = u1 + u2 + gu - fu;
  return r;
}

double H_of(const Parts& q, double eps) { return q.energy + eps * (q.cross + 0.5 * q.u_alpha); }
double Phi_of(const Parts& q, double eps) { return q.v_diss - eps * q.v_l2 + eps * q.u_work; }

}  // namespace

double total_energy(const State& s, const ModelParams& params, std::optional<int> l) {
  const Field u = to_spectral(s.u);
  const double v2 = hsq(s.v, 0.0);
  const double u2 = hsq(u, 0.0);
  const double u1 = hsq(u, 1.0);
  return 0.5 * (v2 + u1 + u2) + eval_G(params.nl, maybe_Sl(u, l)) - inner(maybe_Sl(params.forcing, l), u);
}

double dissipation(const State& s, double alpha) { return hsq(s.v, alpha) + hsq(s.v, 0.0); }

double lyapunov_H(const State& s, const ModelParams& params, const LyapunovParams& lp, std::optional<int> l) {
  return H_of(parts(s, params, l), lp.epsilon);
}

double dissipation_Phi(const State& s, const ModelParams& params, const LyapunovParams& lp,
                       std::optional<int> l) {
  return Phi_of(parts(s, params, l), lp.epsilon);
}

LyapunovParams calibrate_epsilon(const ModelParams& params, std::uint64_t seed, int probes) {
  if (probes < 1) throw std::invalid_argument("calibrate_epsilon needs at least one probe");
  GridPtr grid = params.grid_ptr();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_amp(-2.0, 1.0);
  std::uniform_real_distribution<double> coupling(0.5, 2.0);
  const double f2 = hsq(params.forcing, 0.0);
  const double coercive = 0.25 * (1.0 - params.nl.c0);

  struct Probe {
    Parts q;
    double norm2;
  };
  std::vector<Probe> ensemble;
  ensemble.reserve(probes);
  for (int i = 0; i < probes; ++i) {
    const double kmax = grid->nyquist() / 3.0 / std::ldexp(1.0, i % 4);
    Field u = random_band_limited(grid, kmax, std::pow(10.0, log_amp(rng)), rng);
    Field v(grid);
    switch (i % 3) {
      case 0:
        v = random_band_limited(grid, kmax, std::pow(10.0, log_amp(rng)), rng);
        break;
      case 1:
        v = -coupling(rng) * u;
        break;
      default:
        v = coupling(rng) * u;
        break;
    }
    State s{u, v, 0.0};
    ensemble.push_back({parts(s, params, std::nullopt), hsq(v, 0.0) + nsq(u, 1.0)});
  }

  for (int k = 1; k <= 30; ++k) {
    const double eps = std::ldexp(1.0, -k);
    bool ok = true;
    for (const auto& pr : ensemble) {
      const double H = H_of(pr.q, eps);
      const double slack = 1e-12 * (pr.norm2 + std::abs(pr.q.energy));
      if (H + 2.0 * f2 < coercive * pr.norm2 - slack || Phi_of(pr.q, eps) - eps * H < -slack) {
        ok = false;
        break;
      }
    }
    if (ok) return {eps, 0.0};
  }
  throw std::runtime_error("no epsilon = 2^-k passes the probe ensemble");
}

double functional_H2(const State& z, double alpha, double gamma, double eps) {
  const double base = nsq(z.v, -gamma) + nsq(z.u, 1.0 - gamma);
  if (eps == 0.0) return base;
  return base + eps * (hsq(z.u, alpha) + hsq(z.u, 0.0) + 2.0 * inner(z.u, z.v));
}

double functional_H3(const Field& u, double alpha) { return hsq(u, 1.0 + alpha) + hsq(u, 1.0) + hsq(u, 0.0); }

std::function<void(const State&)> energy_recorder(const ModelParams& params, EnergySeries& out,
                                                  std::optional<int> l) {
  return [params, &out, l](const State& s) {
    out.t.push_back(s.t);
    out.E.push_back(total_energy(s, params, l));
    out.D.push_back(dissipation(s, params.alpha));
  };
}

EnergySeries energy_series(const Trajectory& traj, const ModelParams& params, std::optional<int> l) {
  EnergySeries out;
  auto rec = energy_recorder(params, out, l);
  for (const auto& s : traj.states) rec(s);
  return out;
}

std::vector<double> energy_equality_residual(const EnergySeries& series) {
  const std::size_t n = series.t.size();
  if (series.E.size() != n || series.D.size() != n) throw std::invalid_argument("energy series columns differ in length");
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double scale = 0.0;
  for (double e : series.E) scale = std::max(scale, std::abs(e));
  if (scale == 0.0) scale = 1.0;
  double integral = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    integral += 0.5 * (series.t[i] - series.t[i - 1]) * (series.D[i] + series.D[i - 1]);
    out[i] = std::abs(series.E[i] + integral - series.E[0]) / scale;
  }
  return out;
}

std::vector<double> energy_equality_residual(const Trajectory& traj, const ModelParams& params) {
  return energy_equality_residual(energy_series(traj, params));
}

// Decay fit ------------------------------------------------------------------

namespace {

struct LinearFit {
  double A, B, objective;
};

// min over A, B >= 0 of sum ((A e_i + B - y_i)/y_i)^2 for fixed kappa.
LinearFit fit_amplitudes(std::span<const double> t, std::span<const double> y, double kappa) {
  double see = 0, seb = 0, sbb = 0, sey = 0, sby = 0;
  const std::size_t n = t.size();
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / y[i];
    e[i] = std::exp(-kappa * (t[i] - t[0]));
    const double ew = e[i] * w;
    see += ew * ew;
    seb += ew * w;
    sbb += w * w;
    sey += ew;  // ew * (y w) with y w = 1
    sby += w;
  }
  auto objective = [&](double A, double B) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (A * e[i] + B) / y[i] - 1.0;
      s += r * r;
    }
    return s;
  };
  const double det = see * sbb - seb * seb;
  if (std::abs(det) > 1e-300 * see * sbb) {
    const double A = (sey * sbb - sby * seb) / det;
    const double B = (see * sby - seb * sey) / det;
    if (A >= 0.0 && B >= 0.0) return {A, B, objective(A, B)};
  }
  const double A0 = std::max(0.0, sey / see);
  const double B0 = std::max(0.0, sby / sbb);
  const double oa = objective(A0, 0.0);
  const double ob = objective(0.0, B0);
  return oa <= ob ? LinearFit{A0, 0.0, oa} : LinearFit{0.0, B0, ob};
}

}  // namespace

DecayFit decay_fit(std::span<const double> t, std::span<const double> values, double monotone_tol) {
  const std::size_t n = t.size();
  if (values.size() != n) throw FitFailed("time and value columns differ in length");
  if (n < 10) throw FitFailed("need at least 10 samples");
  double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw FitFailed("values must be positive and finite");
    if (i > 0 && !(t[i] > t[i - 1])) throw FitFailed("times must increase");
    vmax = std::max(vmax, values[i]);
    vmin = std::min(vmin, values[i]);
  }
  double running = values[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (values[i] > running + monotone_tol * (vmax - vmin)) throw FitFailed("series is not monotone");
    running = std::min(running, values[i]);
  }

  const double span = t[n - 1] - t[0];
  const double lo = std::log(1e-3 / span), hi = std::log(1e3 / span);
  constexpr int kGrid = 400;
  int best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double obj = fit_amplitudes(t, values, std::exp(lo + (hi - lo) * i / kGrid)).objective;
    if (obj < best_obj) {
      best_obj = obj;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / kGrid;
  double b = lo + (hi - lo) * std::min(kGrid, best + 1) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = fit_amplitudes(t, values, std::exp(c)).objective;
  double fd = fit_amplitudes(t, values, std::exp(d)).objective;
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fit_amplitudes(t, values, std::exp(c)).objective;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fit_amplitudes(t, values, std::exp(d)).objective;
    }
  }
  const double kappa = std::exp(0.5 * (a + b));
  const LinearFit lf = fit_amplitudes(t, values, kappa);
  // Amplitude is referred to t = 0 rather than the first sample.
  return {kappa, lf.A * std::exp(kappa * t[0]), lf.B, std::sqrt(lf.objective / n)};
}

// Smoothing --------------------------------------------------------------------

Field reconstruct_utt(const State& s, const ModelParams& params) {
  Field u = to_spectral(s.u);
  Field v = to_spectral(s.v);
  Field out = to_spectral(params.forcing);
  if (!params.nl.is_zero()) out -= dealias(to_spectral(eval_g(params.nl, u)));
  auto xi = u.grid().xi_norm();
  auto o = out.data();
  for (std::size_t n = 0; n < o.size(); ++n)
    o[n] += -mode_stiffness(xi[n]) * u.data()[n] - mode_damping(xi[n], params.alpha) * v.data()[n];
  return out;
}

namespace {

const State& state_at(const Trajectory& traj, double t) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  const State* best = &traj.states.front();
  for (const auto& s : traj.states)
    if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
  const double dt = traj.states.size() > 1 ? traj.states[1].t - traj.states[0].t : 0.0;
  if (std::abs(best->t - t) > 0.5 * dt + 1e-12) throw std::invalid_argument("sample time is not on the trajectory");
  return *best;
}

}  // namespace

SmoothingReport smoothing_report(std::span<const SmoothingRun> runs, std::span<const double> times, double a) {
  if (runs.empty() || times.empty()) throw std::invalid_argument("smoothing_report needs runs and times");
  SmoothingReport rep;
  std::vector<std::vector<double>> weighted(runs.size(), std::vector<double>(times.size()));
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    if (!run.traj || !run.params) throw std::invalid_argument("smoothing run is missing data");
    const double alpha = run.params->alpha;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      const State& s = state_at(*run.traj, t);
      SmoothingRow row;
      row.t = t;
      row.modes = s.u.grid().modes_per_dim();
      row.weighted_ut = t * t * nsq(s.v, alpha);
      row.weighted_utt = t * t * nsq(reconstruct_utt(s, *run.params), -alpha);
      row.u_H1alpha = sobolev_norm(s.u, {.s = 1.0 + alpha});
      row.weighted_H3 = t > 0.5 * a ? std::pow(t - 0.5 * a, 1.0 / (1.0 - alpha)) * functional_H3(s.u, alpha) : 0.0;
      weighted[r][i] = row.weighted_ut;
      rep.rows.push_back(row);
    }
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      lo = std::min(lo, weighted[r][i]);
      hi = std::max(hi, weighted[r][i]);
    }
    rep.resolution_spread = std::max(rep.resolution_spread, lo > 0.0 ? hi / lo : (hi > 0.0 ? kInfinity : 1.0));
  }
  if (times.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double w = weighted[0][i] / (times[i] * times[i]);
      if (!(w > 0.0) || !(times[i] > 0.0)) continue;
      const double x = std::log(times[i]), y = std::log(w);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m >= 2 && m * sxx - sx * sx > 0.0) rep.small_t_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  const double alpha = runs[0].params->alpha;
  rep.c_alpha = std::pow(alpha / (1.0 - alpha), alpha / (1.0 - alpha));
  return rep;
}

// Reports ------------------------------------------------------------------------

EnergyReport energy_report(const State& s, const ModelParams& params, const LyapunovParams& lp,
                           const CutoffPsi* psi) {
  const double alpha = params.alpha;
  const Parts q = parts(s, params, std::nullopt);
  EnergyReport r;
  r.t = s.t;
  r.E = q.energy;
  r.H = H_of(q, lp.epsilon);
  r.Phi = Phi_of(q, lp.epsilon);
  const State vel{s.v, reconstruct_utt(s, params), s.t};
  r.H2 = functional_H2(vel, alpha, alpha, lp.epsilon);
  r.H3 = functional_H3(s.u, alpha);
  if (psi) {
    r.R = psi->R;
    r.H4 = tail_energy_H4(s, *psi, params, lp);
  }
  r.u_H1 = sobolev_norm(s.u, {.s = 1.0});
  r.u_Lp1 = lp_norm(s.u, params.nl.p + 1.0);
  r.ut_L2 = sobolev_norm(s.v, {});
  r.ut_Halpha = sobolev_norm(s.v, {.s = alpha});
  r.u_H1alpha = sobolev_norm(s.u, {.s = 1.0 + alpha});
  r.ut_Hminus_alpha = sobolev_norm(s.v, {.s = -alpha});
  return r;
}

std::string energy_report_header() {
  return "t,E,H,Phi,H2,H3,R,H4,u_H1,u_Lp1,ut_L2,ut_Halpha,u_H1alpha,ut_Hminus_alpha";
}

std::string energy_report_row(const EnergyReport& r) {
  const double v[] = {r.t,    r.E,     r.H,     r.Phi,   r.H2,       r.H3,        r.R,
                      r.H4,   r.u_H1,  r.u_Lp1, r.ut_L2, r.ut_Halpha, r.u_H1alpha, r.ut_Hminus_alpha};
  std::string out;
  for (std::size_t i = 0; i < std::size(v); ++i) {
    if (i) out += ',';
    out += csv_number(v[i]);
  }
  return out;
}

}  // namespace fracdamp
