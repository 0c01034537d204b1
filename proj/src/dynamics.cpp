#include "fracdamp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fracdamp/errors.hpp"
#include "fracdamp/mollifier.hpp"
#include "fracdamp/random_fields.hpp"
#include "fracdamp/spectral.hpp"

namespace fracdamp {

State zero_state(GridPtr grid) {
  return {Field(grid, Representation::spectral), Field(grid, Representation::spectral), 0.0};
}

State make_state(Field u, Field v, double t) {
  if (!same_grid(u, v)) throw std::invalid_argument("state components live on different grids");
  return {std::move(u), std::move(v), t};
}

ModelParams::ModelParams(GridPtr grid, double alpha_, Nonlinearity nl_)
    : alpha(alpha_), nl(nl_), forcing(std::move(grid)) {}

ModelParams::ModelParams(double alpha_, Nonlinearity nl_, Field forcing_)
    : alpha(alpha_), nl(nl_), forcing(std::move(forcing_)) {}

void validate(const ModelParams& params) {
  std::string err;
  if (!(params.alpha > 0.5 && params.alpha < 1.0)) err += "dissipative index out of (1/2,1); ";
  try {
    validate(params.nl, params.grid().dim(), params.alpha);
  } catch (const std::invalid_argument& e) {
    err += std::string(e.what()) + "; ";
  }
  for (const auto& c : params.forcing.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      err += "forcing is not finite; ";
      break;
    }
  if (!err.empty()) throw std::invalid_argument(err.substr(0, err.size() - 2));
}

double mode_damping(double xi, double alpha) { return std::pow(xi, 2.0 * alpha) + 1.0; }
double mode_stiffness(double xi) { return xi * xi + 1.0; }

namespace {

// h*phi_1(hA) e2 and h*phi_2(hA) e2 by their Taylor series; A = [[0,1],[-b,-a]].
void phi_series(double a, double b, double h, std::array<double, 2>& p1, std::array<double, 2>& p2) {
  double x = 0.0, y = 1.0;  // A^j e2
  double c1 = h;            // h^{j+1}/(j+1)!
  double c2 = 0.5 * h;      // h^{j+1}/(j+2)!
  p1 = {0.0, 0.0};
  p2 = {0.0, 0.0};
  for (int j = 0; j < 40; ++j) {
    p1[0] += c1 * x;
    p1[1] += c1 * y;
    p2[0] += c2 * x;
    p2[1] += c2 * y;
    const double nx = y;
    const double ny = -b * x - a * y;
    x = nx;
    y = ny;
    c1 *= h / (j + 2);
    c2 *= h / (j + 3);
    if (c1 * (std::abs(x) + std::abs(y)) < 1e-18 * (std::abs(p1[0]) + std::abs(p1[1]))) break;
  }
}

}  // namespace

ModePropagator mode_propagator(double damping, double stiffness, double h) {
  const double a = damping;
  const double b = stiffness;
  const double mu = 0.5 * a;
  const double disc = mu * mu - b;
  ModePropagator P;
  auto& E = P.E;

  if (disc > 0.0 && 2.0 * std::sqrt(disc) * h > 1.0) {
    const double s = std::sqrt(disc);
    const double r1 = -b / (mu + s);
    const double r2 = -(mu + s);
    const double e1 = std::exp(r1 * h);
    const double e2 = std::exp(r2 * h);
    const double w = 1.0 / (2.0 * s);  // 1/(r1 - r2)
    E[0] = (-r2 * e1 + r1 * e2) * w;
    E[1] = (e1 - e2) * w;
    E[2] = -b * E[1];
    E[3] = (r1 * e1 - r2 * e2) * w;
  } else {
    const double decay = std::exp(-mu * h);
    double c, sh;
    if (disc > 0.0) {
      const double x = std::sqrt(disc) * h;
      c = decay * std::cosh(x);
      sh = decay * h * (x == 0.0 ? 1.0 : std::sinh(x) / x);
    } else {
      const double x = std::sqrt(-disc) * h;
      c = decay * std::cos(x);
      sh = decay * h * (x == 0.0 ? 1.0 : std::sin(x) / x);
    }
    E[0] = c + mu * sh;
    E[1] = sh;
    E[2] = -b * sh;
    E[3] = c - mu * sh;
  }

  const double norm_a = std::max(1.0, a + b);
  if (norm_a * h < 0.5) {
    phi_series(a, b, h, P.phi1, P.phi2);
  } else {
    // A^{-1} = (1/b) [[-a, -1], [b, 0]]
    P.phi1 = {(-a * E[1] - (E[3] - 1.0)) / b, E[1]};
    const double y0 = P.phi1[0];
    const double y1 = P.phi1[1] - h;
    P.phi2 = {(-a * y0 - y1) / (b * h), y0 / h};
  }
  return P;
}

double stability_bound(const ModelParams& params, Scheme scheme) {
  constexpr double kNonlinearBound = 0.5;
  if (scheme == Scheme::duhamel_etd) return kNonlinearBound;
  double lam = 0.0;
  for (double xi : params.grid().xi_norm()) {
    const double mu = 0.5 * mode_damping(xi, params.alpha);
    const double b = mode_stiffness(xi);
    const double disc = mu * mu - b;
    lam = std::max(lam, disc > 0.0 ? mu + std::sqrt(disc) : std::sqrt(b));
  }
  return std::min(kNonlinearBound, 2.5 / lam);
}

Integrator::Integrator(ModelParams params, IntegratorConfig cfg)
    : params_(std::move(params)), cfg_(cfg), forcing_hat_(to_spectral(params_.forcing)) {
  validate(params_);
  if (!(cfg_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double bound = stability_bound(params_, cfg_.scheme);
  if (cfg_.dt > bound) {
    std::ostringstream msg;
    msg << "integrator failure: dt = " << cfg_.dt << " exceeds stability bound " << bound;
    throw std::invalid_argument(msg.str());
  }
  const Grid& g = params_.grid();
  auto xi = g.xi_norm();
  damping_.resize(g.size());
  stiffness_.resize(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    damping_[n] = mode_damping(xi[n], params_.alpha);
    stiffness_[n] = mode_stiffness(xi[n]);
  }
  if (cfg_.scheme == Scheme::duhamel_etd) {
    props_.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) props_[n] = mode_propagator(damping_[n], stiffness_[n], cfg_.dt);
  }
  if (cfg_.l_trunc) {
    forcing_hat_ = apply_Sl(forcing_hat_, *cfg_.l_trunc);
    const double scale = std::ldexp(1.0, *cfg_.l_trunc);
    cutoff_.resize(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) cutoff_[n] = cutoff_profile(xi[n] / scale);
  }
}

Field Integrator::nonlinear_forcing(const Field& u) const {
  if (params_.nl.is_zero()) return forcing_hat_;
  Field w = to_spectral(u);
  if (!cutoff_.empty()) {
    auto d = w.data();
    for (std::size_t n = 0; n < d.size(); ++n) d[n] *= cutoff_[n];
  }
  Field gw = to_spectral(eval_g(params_.nl, w));
  auto d = gw.data();
  if (cfg_.dealias) {
    const int cut = params_.grid().modes_per_dim() / 3;
    auto kabs = params_.grid().max_abs_mode();
    for (std::size_t n = 0; n < d.size(); ++n)
      if (kabs[n] > cut) d[n] = 0.0;
  }
  if (!cutoff_.empty())
    for (std::size_t n = 0; n < d.size(); ++n) d[n] *= cutoff_[n];
  auto fh = forcing_hat_.data();
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = fh[n] - d[n];
  return gw;
}

void Integrator::check_finite(const State& s) const {
  double sum = 0.0;
  for (const auto& c : s.u.data()) sum += std::norm(c);
  for (const auto& c : s.v.data()) sum += std::norm(c);
  const Grid& g = params_.grid();
  const double norm = std::sqrt(sum * std::pow(g.box_length(), g.dim()));
  if (!std::isfinite(norm) || norm > kBlowUpThreshold) throw StateBlowUp("L2 norm of (u, u_t) exceeded threshold");
}

State Integrator::step(const State& s) const {
  State out = cfg_.scheme == Scheme::duhamel_etd ? step_etd(s) : step_rk4(s);
  check_finite(out);
  return out;
}

State Integrator::step_etd(const State& s) const {
  State a{to_spectral(s.u), to_spectral(s.v), s.t + cfg_.dt};
  const Field Fn = nonlinear_forcing(a.u);
  {
    auto u = a.u.data();
    auto v = a.v.data();
    auto F = Fn.data();
    for (std::size_t n = 0; n < u.size(); ++n) {
      const auto& P = props_[n];
      const cplx un = u[n], vn = v[n];
      u[n] = P.E[0] * un + P.E[1] * vn + P.phi1[0] * F[n];
      v[n] = P.E[2] * un + P.E[3] * vn + P.phi1[1] * F[n];
    }
  }
  const Field Fa = nonlinear_forcing(a.u);
  auto u = a.u.data();
  auto v = a.v.data();
  auto F0 = Fn.data();
  auto F1 = Fa.data();
  for (std::size_t n = 0; n < u.size(); ++n) {
    const cplx dF = F1[n] - F0[n];
    u[n] += props_[n].phi2[0] * dF;
    v[n] += props_[n].phi2[1] * dF;
  }
  return a;
}

State Integrator::step_rk4(const State& s) const {
  const double h = cfg_.dt;
  const Field u0 = to_spectral(s.u);
  const Field v0 = to_spectral(s.v);
  const std::size_t size = u0.size();

  auto rhs = [&](const Field& u, const Field& v, Field& du, Field& dv) {
    const Field F = nonlinear_forcing(u);
    auto ud = u.data();
    auto vd = v.data();
    auto fd = F.data();
    auto dud = du.data();
    auto dvd = dv.data();
    for (std::size_t n = 0; n < size; ++n) {
      dud[n] = vd[n];
      dvd[n] = -stiffness_[n] * ud[n] - damping_[n] * vd[n] + fd[n];
    }
  };
  auto axpy = [&](const Field& x, double c, const Field& y) {
    Field r = x;
    auto rd = r.data();
    auto yd = y.data();
    for (std::size_t n = 0; n < size; ++n) rd[n] += c * yd[n];
    return r;
  };

  GridPtr g = u0.grid_ptr();
  Field k1u(g, Representation::spectral), k1v(g, Representation::spectral);
  Field k2u = k1u, k2v = k1u, k3u = k1u, k3v = k1u, k4u = k1u, k4v = k1u;
  rhs(u0, v0, k1u, k1v);
  rhs(axpy(u0, 0.5 * h, k1u), axpy(v0, 0.5 * h, k1v), k2u, k2v);
  rhs(axpy(u0, 0.5 * h, k2u), axpy(v0, 0.5 * h, k2v), k3u, k3v);
  rhs(axpy(u0, h, k3u), axpy(v0, h, k3v), k4u, k4v);

  State out{u0, v0, s.t + h};
  auto u = out.u.data();
  auto v = out.v.data();
  for (std::size_t n = 0; n < size; ++n) {
    u[n] += h / 6.0 * (k1u.data()[n] + 2.0 * k2u.data()[n] + 2.0 * k3u.data()[n] + k4u.data()[n]);
    v[n] += h / 6.0 * (k1v.data()[n] + 2.0 * k2v.data()[n] + 2.0 * k3v.data()[n] + k4v.data()[n]);
  }
  return out;
}

State linear_semigroup_step(const State& s, const ModelParams& params, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("dt must be nonnegative");
  State out{to_spectral(s.u), to_spectral(s.v), s.t + dt};
  auto xi = out.u.grid().xi_norm();
  auto u = out.u.data();
  auto v = out.v.data();
  for (std::size_t n = 0; n < u.size(); ++n) {
    const auto P = mode_propagator(mode_damping(xi[n], params.alpha), mode_stiffness(xi[n]), dt);
    const cplx un = u[n], vn = v[n];
    u[n] = P.E[0] * un + P.E[1] * vn;
    v[n] = P.E[2] * un + P.E[3] * vn;
  }
  return out;
}

State duhamel_step(const State& s, const ModelParams& params, const IntegratorConfig& cfg) {
  return Integrator(params, cfg).step(s);
}

namespace {

long long step_count(double T, double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("integration time T must be positive");
  const long long n = std::llround(T / dt);
  if (n < 1 || std::abs(n * dt - T) > 1e-9 * T) throw std::invalid_argument("T must be an integer multiple of dt");
  return n;
}

Trajectory run(const Integrator& integ, State s, double T, const ObserverSpec& obs) {
  if (obs.stride < 1) throw std::invalid_argument("observer stride must be positive");
  const long long steps = step_count(T, integ.config().dt);
  const double t0 = s.t;
  Trajectory traj;
  auto record = [&](const State& st) {
    if (obs.callback) obs.callback(st);
    if (obs.store) traj.states.push_back(st);
  };
  s.u = to_spectral(s.u);
  s.v = to_spectral(s.v);
  record(s);
  for (long long i = 1; i <= steps; ++i) {
    s = integ.step(s);
    s.t = t0 + static_cast<double>(i) * integ.config().dt;
    if (i % obs.stride == 0 || i == steps) record(s);
  }
  return traj;
}

}  // namespace

Trajectory integrate(const State& s0, const ModelParams& params, const IntegratorConfig& cfg, double T,
                     const ObserverSpec& observers) {
  Integrator integ(params, cfg);
  return run(integ, s0, T, observers);
}

Trajectory integrate_auxiliary(const State& s0, const ModelParams& params, int l, IntegratorConfig cfg, double T,
                               const ObserverSpec& observers) {
  cfg.l_trunc = l;
  State s{apply_Sl(to_spectral(s0.u), l), apply_Sl(to_spectral(s0.v), l), s0.t};
  Integrator integ(params, cfg);
  return run(integ, std::move(s), T, observers);
}

State difference(const State& a, const State& b) {
  return {to_spectral(a.u) - to_spectral(b.u), to_spectral(a.v) - to_spectral(b.v), a.t};
}

double norm_X_alpha(const State& s, double alpha) {
  const double nu = sobolev_norm(s.u, {.s = 2.0 * alpha + 1.0});
  const double nv = sobolev_norm(s.v, {.s = 2.0 * alpha});
  return std::sqrt(nu * nu + nv * nv);
}

double norm_H(const State& s, const Nonlinearity& nl) {
  const double nu = sobolev_norm(s.u, {.s = 1.0});
  const double nv = sobolev_norm(s.v, {});
  double sq = nu * nu + nv * nv;
  if (nl.d0(s.u.grid().dim()) == 1) {
    const double np = lp_norm(s.u, nl.p + 1.0);
    sq += np * np;
  }
  return std::sqrt(sq);
}

double norm_H_alpha(const State& s, double alpha) {
  const double nu = sobolev_norm(s.u, {.s = 1.0 + alpha});
  const double nv = sobolev_norm(s.v, {.s = alpha});
  return std::sqrt(nu * nu + nv * nv);
}

double norm_H_minus(const State& s, double gamma) {
  const double nu = sobolev_norm(s.u, {.s = 1.0 - gamma});
  const double nv = sobolev_norm(s.v, {.s = -gamma});
  return std::sqrt(nu * nu + nv * nv);
}

// Picard demonstrator ------------------------------------------------------

namespace {

using Path = std::vector<State>;

double z_norm(const Path& p, double alpha) {
  double m = 0.0;
  for (const auto& s : p) m = std::max(m, norm_X_alpha(s, alpha));
  return m;
}

double z_distance(const Path& a, const Path& b, double alpha) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, norm_X_alpha(difference(a[n], b[n]), alpha));
  return m;
}

// (TU)(t_{n+1}) = Sigma(h)(TU)(t_n) + int_{t_n}^{t_{n+1}} Sigma(t_{n+1}-s) F(u(s)) ds with F
// interpolated linearly between the nodes.
Path duhamel_map(const Integrator& integ, const State& u0, const Path& path) {
  Path out;
  out.reserve(path.size());
  out.push_back(u0);
  Field Fprev = integ.nonlinear_forcing(path[0].u);
  const auto props = integ.propagators();
  for (std::size_t k = 1; k < path.size(); ++k) {
    Field Fnext = integ.nonlinear_forcing(path[k].u);
    State s = out.back();
    s.t = path[k].t;
    auto u = s.u.data();
    auto v = s.v.data();
    auto F0 = Fprev.data();
    auto F1 = Fnext.data();
    for (std::size_t n = 0; n < u.size(); ++n) {
      const auto& P = props[n];
      const cplx un = u[n], vn = v[n];
      const cplx dF = F1[n] - F0[n];
      u[n] = P.E[0] * un + P.E[1] * vn + P.phi1[0] * F0[n] + P.phi2[0] * dF;
      v[n] = P.E[2] * un + P.E[3] * vn + P.phi1[1] * F0[n] + P.phi2[1] * dF;
    }
    out.push_back(std::move(s));
    Fprev = std::move(Fnext);
  }
  return out;
}

State random_direction(GridPtr grid, int l, double alpha, double size, std::mt19937_64& rng) {
  const double kmax = std::ldexp(2.0, l);
  State w{apply_Sl(to_spectral(random_band_limited(grid, kmax, 1.0, rng)), l),
          apply_Sl(to_spectral(random_band_limited(grid, kmax, 1.0, rng)), l), 0.0};
  const double n = norm_X_alpha(w, alpha);
  w.u *= size / n;
  w.v *= size / n;
  return w;
}

}  // namespace

PicardReport picard_contraction_demo(const State& s0, const ModelParams& params, int l, double T,
                                     const PicardOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("integration time T must be positive");
  if (options.steps < 1 || options.pairs < 1) throw std::invalid_argument("picard demo needs steps and pairs >= 1");
  const double h = T / options.steps;
  IntegratorConfig cfg{.dt = h, .scheme = Scheme::duhamel_etd, .dealias = options.dealias, .l_trunc = l};
  Integrator integ(params, cfg);
  const double alpha = params.alpha;
  GridPtr grid = params.grid_ptr();

  const State u0{apply_Sl(to_spectral(s0.u), l), apply_Sl(to_spectral(s0.v), l), s0.t};
  Path linear;
  linear.reserve(options.steps + 1);
  linear.push_back(u0);
  for (int k = 1; k <= options.steps; ++k) {
    State s = linear_semigroup_step(linear.back(), params, h);
    s.t = s0.t + k * h;
    linear.push_back(std::move(s));
  }

  PicardReport rep;
  std::mt19937_64 rng(options.seed);
  const double base = norm_X_alpha(u0, alpha);
  const double size = options.perturbation * (base > 0.0 ? base : 1.0);
  auto perturbed = [&](const State& w) {
    Path p = linear;
    for (int k = 0; k <= options.steps; ++k) {
      const double theta = static_cast<double>(k) / options.steps;
      p[k].u += theta * w.u;
      p[k].v += theta * w.v;
    }
    return p;
  };
  for (int i = 0; i < options.pairs; ++i) {
    const Path U = perturbed(random_direction(grid, l, alpha, size, rng));
    const Path V = perturbed(random_direction(grid, l, alpha, size, rng));
    const double denom = z_distance(U, V, alpha);
    const double num = z_distance(duhamel_map(integ, u0, U), duhamel_map(integ, u0, V), alpha);
    rep.pair_ratios.push_back(denom > 0.0 ? num / denom : 0.0);
  }
  rep.contraction_ratio = *std::max_element(rep.pair_ratios.begin(), rep.pair_ratios.end());
  rep.status = rep.contraction_ratio < 1.0 ? "contraction" : "no contraction at this T";

  Path iterate = linear;
  for (int it = 0; it < options.max_iterations; ++it) {
    Path next = duhamel_map(integ, u0, iterate);
    const double inc = z_distance(next, iterate, alpha);
    const double scale = std::max(z_norm(next, alpha), 1e-300);
    rep.iterate_increments.push_back(inc / scale);
    iterate = std::move(next);
    rep.iterations = it + 1;
    if (inc <= options.tolerance * scale) {
      rep.converged = true;
      break;
    }
    if (!std::isfinite(inc)) break;
  }

  const Trajectory ref = integrate_auxiliary(s0, params, l, cfg, T);
  double dev = 0.0, ref_size = 0.0;
  for (std::size_t k = 0; k < iterate.size(); ++k) {
    dev = std::max(dev, norm_X_alpha(difference(iterate[k], ref.states[k]), alpha));
    ref_size = std::max(ref_size, norm_X_alpha(ref.states[k], alpha));
  }
  rep.deviation_from_integrator = ref_size > 0.0 ? dev / ref_size : dev;
  return rep;
}

// Trajectory CSV -----------------------------------------------------------

namespace {

constexpr const char* kTrajectorySchema = "fracdamp.trajectory.v1";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("cannot serialize an empty trajectory");
  const Grid& g = traj.states.front().u.grid();
  os << "# schema=" << kTrajectorySchema << " dim=" << g.dim() << " box_length=" << fmt(g.box_length())
     << " modes=" << g.modes_per_dim() << '\n';
  os << "t,mode";
  for (int d = 0; d < g.dim(); ++d) os << ",k" << d + 1;
  os << ",u_re,u_im,v_re,v_im\n";
  for (const auto& s : traj.states) {
    const Field u = to_spectral(s.u);
    const Field v = to_spectral(s.v);
    const std::string t = fmt(s.t);
    for (std::size_t n = 0; n < g.size(); ++n) {
      auto slots = g.unflatten(n);
      os << t << ',' << n;
      for (int d = 0; d < g.dim(); ++d) os << ',' << g.mode_index(slots[d]);
      os << ',' << fmt(u.data()[n].real()) << ',' << fmt(u.data()[n].imag()) << ',' << fmt(v.data()[n].real())
         << ',' << fmt(v.data()[n].imag()) << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# schema=", 0) != 0) throw std::runtime_error("missing schema line");
  std::istringstream head(line.substr(2));
  std::string tok, schema;
  int dim = 0, modes = 0;
  double length = 0.0;
  while (head >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "schema") schema = val;
    else if (key == "dim") dim = std::stoi(val);
    else if (key == "box_length") length = std::stod(val);
    else if (key == "modes") modes = std::stoi(val);
  }
  if (schema != kTrajectorySchema) throw std::runtime_error("unsupported trajectory schema '" + schema + "'");
  GridPtr grid = make_grid(dim, length, modes);
  std::getline(is, line);  // column header

  Trajectory traj;
  std::vector<cplx> u, v;
  double t = 0.0;
  const std::size_t cols = 2 + dim + 4;
  std::vector<double> row(cols);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const auto next = line.find(',', pos);
      row[c] = std::strtod(line.c_str() + pos, nullptr);
      if (next == std::string::npos && c + 1 < cols) throw std::runtime_error("short trajectory row");
      pos = next + 1;
    }
    if (u.empty()) t = row[0];
    u.emplace_back(row[2 + dim], row[3 + dim]);
    v.emplace_back(row[4 + dim], row[5 + dim]);
    if (u.size() == grid->size()) {
      traj.states.push_back({Field(grid, std::move(u), Representation::spectral),
                             Field(grid, std::move(v), Representation::spectral), t});
      u.clear();
      v.clear();
    }
  }
  if (!u.empty()) throw std::runtime_error("truncated trajectory snapshot");
  return traj;
}

}  // namespace fracdamp
