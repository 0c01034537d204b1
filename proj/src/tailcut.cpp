#include "fracdamp/tailcut.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "fracdamp/csv.hpp"
#include "fracdamp/spectral.hpp"

namespace fracdamp {

double ramp_K0(double s) {
  if (s <= 1.0) return 0.0;
  if (s <= 2.0) return s - 1.0;
  return 1.0;
}

namespace {

// Cumulative moments of the standard bump exp(-1/(1-x^2)) on [-1, 1],
// normalized to unit mass: P(x) = int_{-1}^x rho, Q(x) = int_{-1}^x y rho(y) dy.
class BumpMoments {
 public:
  BumpMoments() : P_(kCells + 1), Q_(kCells + 1) {
    auto rho = [](double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; };
    const double h = 2.0 / kCells;
    P_[0] = Q_[0] = 0.0;
    for (int i = 1; i <= kCells; ++i) {
      const double x0 = -1.0 + (i - 1) * h, x1 = -1.0 + i * h, xm = 0.5 * (x0 + x1);
      // Simpson on each cell.
      const double r0 = rho(x0), r1 = rho(x1), rm = rho(xm);
      P_[i] = P_[i - 1] + h / 6.0 * (r0 + 4.0 * rm + r1);
      Q_[i] = Q_[i - 1] + h / 6.0 * (x0 * r0 + 4.0 * xm * rm + x1 * r1);
    }
    const double mass = P_[kCells];
    for (int i = 0; i <= kCells; ++i) {
      P_[i] /= mass;
      Q_[i] /= mass;
    }
  }

  double P(double x) const { return lookup(P_, x, 1.0); }
  double Q(double x) const { return lookup(Q_, x, Q_[kCells]); }

 private:
  static constexpr int kCells = 20000;

  static double lookup(const std::vector<double>& t, double x, double right) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return right;
    const double pos = (x + 1.0) * 0.5 * kCells;
    const int i = std::min(kCells - 1, static_cast<int>(pos));
    const double w = pos - i;
    return (1.0 - w) * t[i] + w * t[i + 1];
  }

  std::vector<double> P_, Q_;
};

const BumpMoments& bump_moments() {
  static const BumpMoments m;
  return m;
}

}  // namespace

double mollified_ramp(double s, double delta) {
  if (!(delta > 0.0)) return ramp_K0(s);
  const auto& m = bump_moments();
  // K_delta(s) = int rho_delta(y) K0(s - y) dy, split at the kinks y = s-2, s-1.
  const double a = (s - 2.0) / delta, b = (s - 1.0) / delta;
  const double Pa = m.P(a), Pb = m.P(b);
  return Pa + (s - 1.0) * (Pb - Pa) - delta * (m.Q(b) - m.Q(a));
}

double mollified_ramp_derivative(double s, double delta) {
  if (!(delta > 0.0)) return (s > 1.0 && s < 2.0) ? 1.0 : 0.0;
  const auto& m = bump_moments();
  return m.P((s - 1.0) / delta) - m.P((s - 2.0) / delta);
}

double CutoffPsi::operator()(double r) const { return mollified_ramp(r / R - delta, delta); }

CutoffPsi build_psi(GridPtr grid, double R, double delta) {
  if (!(R > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("mollification width must lie in (0,1)");
  if (!(2.0 * R * (1.0 + delta) < 0.5 * grid->box_length())) throw std::invalid_argument("cutoff does not fit box");
  CutoffPsi c{R, delta, Field(grid), Field(grid)};
  auto p = c.psi.data();
  auto g = c.grad_norm.data();
  for (std::size_t n = 0; n < grid->size(); ++n) {
    const double s = grid->radius(n) / R - delta;
    p[n] = mollified_ramp(s, delta);
    g[n] = mollified_ramp_derivative(s, delta) / R;
  }
  return c;
}

double psi_riesz_norm_check(const CutoffPsi& psi, double s, double q) {
  const int dim = psi.psi.grid().dim();
  const double nq = std::isinf(q) ? 0.0 : dim / q;
  if (!(s <= 1.0) || !(s >= 0.0) || !(q >= 1.0) || s - nq < -1e-12)
    throw std::invalid_argument("psi_riesz_norm_check needs 0 <= s <= 1, q >= 1, s - N/q >= 0");
  if (s == 0.0) return lp_norm(psi.psi, q) * std::pow(psi.R, -nq);
  Field centred = psi.psi;
  const cplx corner = centred.data()[0];
  for (auto& c : centred.data()) c -= corner;
  return lp_norm(riesz_power(centred, s), q) * std::pow(psi.R, s - nq);
}

Field commutator_field(const Field& a, const Field& b, double s) {
  Field out = to_real(riesz_power(product(a, b), s));
  out -= product(a, riesz_power(b, s));
  out -= product(b, riesz_power(a, s));
  return out;
}

CommutatorResult commutator_defect(const Field& a, const Field& b, const CommutatorExponents& e) {
  std::string err;
  if (!(e.s > 0.0 && e.s < 1.0)) err += "s must lie in (0,1); ";
  if (!(e.s1 >= 0.0 && e.s1 <= e.s && e.s2 >= 0.0 && e.s2 <= e.s) || std::abs(e.s1 + e.s2 - e.s) > 1e-12)
    err += "need s = s1 + s2 with s1, s2 in [0, s]; ";
  const bool p1_inf = std::isinf(e.p1);
  if (p1_inf && e.s1 != 0.0) err += "p1 = inf requires s1 = 0; ";
  if (!(e.p > 1.0) || std::isinf(e.p) || !(e.p1 > 1.0) || !(e.p2 > 1.0) || std::isinf(e.p2))
    err += "exponents must lie in (1, inf); ";
  const double inv1 = p1_inf ? 0.0 : 1.0 / e.p1;
  if (std::abs(1.0 / e.p - inv1 - 1.0 / e.p2) > 1e-12) err += "need 1/p = 1/p1 + 1/p2; ";
  if (!err.empty()) throw std::invalid_argument(err.substr(0, err.size() - 2));

  CommutatorResult r;
  r.defect_norm = lp_norm(commutator_field(a, b, e.s), e.p);
  r.bound = lp_norm(riesz_power(a, e.s1), e.p1) * lp_norm(riesz_power(b, e.s2), e.p2);
  if (r.defect_norm == 0.0)
    r.ratio = 0.0;
  else
    r.ratio = r.bound > 0.0 ? r.defect_norm / r.bound : kInfinity;
  return r;
}

namespace {

double psi_grad_l2(const Field& u, const Field& psi) {
  double sq = 0.0;
  for (int d = 0; d < u.grid().dim(); ++d) {
    std::array<int, 3> order{0, 0, 0};
    order[d] = 1;
    const double n = lp_norm(product(psi, partial_derivative(u, order)), 2.0);
    sq += n * n;
  }
  return std::sqrt(sq);
}

}  // namespace

CutoffInequalityTerms cutoff_inequality_check(const Field& u, const CutoffPsi& psi, double alpha, double C) {
  CutoffInequalityTerms t;
  t.lhs = lp_norm(product(psi.psi, riesz_power(u, alpha)), 2.0);
  t.local = lp_norm(product(psi.psi, u), 2.0) + psi_grad_l2(u, psi.psi);
  t.far = std::pow(psi.R, -0.5 * alpha) * sobolev_norm(u, {.s = 1.0});
  t.C = C;
  t.rhs = C * (t.local + t.far);
  t.margin = t.rhs - t.lhs;
  return t;
}

double calibrate_cutoff_inequality(std::span<const Field> fields, std::span<const CutoffPsi* const> psis, double alpha,
                         double safety) {
  if (fields.size() != psis.size() || fields.empty())
    throw std::invalid_argument("calibration needs one cut-off per field");
  double worst = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto t = cutoff_inequality_check(fields[i], *psis[i], alpha, 1.0);
    const double denom = t.local + t.far;
    if (denom > 0.0) worst = std::max(worst, t.lhs / denom);
  }
  return safety * worst;
}

double tail_energy_H4(const State& s, const CutoffPsi& psi, const ModelParams& params, const LyapunovParams& lp) {
  const Field u = to_real(s.u);
  const Field v = to_real(s.v);
  const Field f = to_real(params.forcing);
  const Field& p = psi.psi;
  const double dv = u.grid().cell_volume();

  const double psi_v = lp_norm(product(p, v), 2.0);
  const double psi_u = lp_norm(product(p, u), 2.0);
  const double psi_grad = psi_grad_l2(u, p);
  const double psi_lam = lp_norm(product(p, riesz_power(u, params.alpha)), 2.0);

  double pot = 0.0, cross = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double w = p.data()[n].real() * p.data()[n].real();
    const double un = u.data()[n].real();
    pot += w * (params.nl.G(un) - f.data()[n].real() * un);
    cross += w * un * v.data()[n].real();
  }
  pot *= dv;
  cross *= dv;
  return 0.5 * (psi_v * psi_v + psi_grad * psi_grad + psi_u * psi_u + 2.0 * pot) +
         lp.epsilon * (cross + 0.5 * (psi_u * psi_u + psi_lam * psi_lam));
}

double tail_norm(const State& s, double r, const Nonlinearity& nl) {
  const Grid& g = s.u.grid();
  const Field u = to_real(s.u);
  const Field v = to_real(s.v);
  std::vector<Field> grads;
  for (int d = 0; d < g.dim(); ++d) {
    std::array<int, 3> order{0, 0, 0};
    order[d] = 1;
    grads.push_back(to_real(partial_derivative(u, order)));
  }
  const bool with_lp = nl.d0(g.dim()) == 1;
  double sq = 0.0, lp = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.radius(n) <= r) continue;
    const double un = u.data()[n].real();
    const double vn = v.data()[n].real();
    sq += un * un + vn * vn;
    for (const auto& gr : grads) sq += std::norm(gr.data()[n]);
    if (with_lp) lp += std::pow(std::abs(un), nl.p + 1.0);
  }
  sq *= g.cell_volume();
  if (with_lp) sq += std::pow(lp * g.cell_volume(), 2.0 / (nl.p + 1.0));
  return std::sqrt(sq);
}

double field_tail_l2(const Field& f, double r) {
  const Field p = to_real(f);
  const Grid& g = p.grid();
  double sq = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    if (g.radius(n) > r) sq += std::norm(p.data()[n]);
  return std::sqrt(sq * g.cell_volume());
}

TailExperiment tail_smallness_experiment(const State& s0, const ModelParams& params, const IntegratorConfig& cfg,
                                         std::span<const double> radii, double T, double delta,
                                         const LyapunovParams& lp) {
  if (radii.empty()) throw std::invalid_argument("tail experiment needs at least one radius");
  ObserverSpec obs;
  obs.stride = std::numeric_limits<int>::max();
  const Trajectory traj = integrate(s0, params, cfg, T, obs);
  const State& first = traj.states.front();
  const State& last = traj.back();
  GridPtr grid = params.grid_ptr();

  std::vector<std::future<TailRow>> jobs;
  for (double R : radii) {
    jobs.push_back(std::async(std::launch::async, [&, R] {
      const CutoffPsi psi = build_psi(grid, R, delta);
      TailRow row;
      row.R = R;
      row.tail_norm = tail_norm(last, 2.0 * R, params.nl);
      row.f_tail = field_tail_l2(params.forcing, R);
      row.shape = std::pow(R, -0.5 * params.alpha) + row.f_tail * row.f_tail;
      row.H4_initial = tail_energy_H4(first, psi, params, lp);
      row.H4_final = tail_energy_H4(last, psi, params, lp);
      return row;
    }));
  }
  TailExperiment ex;
  for (auto& j : jobs) ex.rows.push_back(j.get());

  for (const auto& row : ex.rows) ex.fit_constant = std::max(ex.fit_constant, row.tail_norm / row.shape);
  double sq = 0.0;
  int m = 0;
  for (auto& row : ex.rows) {
    row.predicted_bound = ex.fit_constant * row.shape;
    if (row.tail_norm > 0.0 && row.predicted_bound > 0.0) {
      const double d = std::log(row.tail_norm / row.predicted_bound);
      sq += d * d;
      ++m;
    }
  }
  ex.fit_residual = m ? std::sqrt(sq / m) : 0.0;
  ex.strictly_decreasing = true;
  for (std::size_t i = 1; i < ex.rows.size(); ++i)
    if (!(ex.rows[i].tail_norm < ex.rows[i - 1].tail_norm)) ex.strictly_decreasing = false;
  return ex;
}

std::string tail_table_header() { return "R,tail_norm,predicted_bound,f_tail,shape,H4_initial,H4_final"; }

std::string tail_table_row(const TailRow& r) {
  return csv_number(r.R) + ',' + csv_number(r.tail_norm) + ',' + csv_number(r.predicted_bound) + ',' +
         csv_number(r.f_tail) + ',' + csv_number(r.shape) + ',' + csv_number(r.H4_initial) + ',' +
         csv_number(r.H4_final);
}

}  // namespace fracdamp
