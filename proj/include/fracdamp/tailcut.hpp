#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracdamp/dynamics.hpp"
#include "fracdamp/energy.hpp"

namespace fracdamp {

/// Piecewise-linear ramp: 0 on [0,1], s - 1 on (1,2], 1 beyond.
double ramp_K0(double s);

/// Radial cut-off built from the ramp mollified at width delta.
///
/// The mollified ramp is evaluated at |x|/R - delta, so psi vanishes on
/// |x| < R and equals 1 for |x| > 2R(1 + delta).
struct CutoffPsi {
  double R = 0.0;
  double delta = 0.0;
  Field psi;
  /// |grad psi| evaluated from the closed-form derivative of the profile.
  Field grad_norm;

  /// The profile K_delta(r/R - delta) at radius r.
  double operator()(double r) const;
};

/// Mollified ramp K_delta(s) = (rho_delta * K0)(s) and its derivative.
double mollified_ramp(double s, double delta);
double mollified_ramp_derivative(double s, double delta);

/// Throws "cutoff does not fit box" unless 2R(1 + delta) < L/2.
CutoffPsi build_psi(GridPtr grid, double R, double delta);

/// ||psi - psi_corner||_{Hdot^{s,q}} R^{s - N/q}, with psi_corner the value at
/// the box corner. For s = 0 the plain L^q norm of psi is used.
double psi_riesz_norm_check(const CutoffPsi& psi, double s, double q);

struct CommutatorExponents {
  double s = 0.5;
  double p = 2.0;
  double p1 = 4.0;
  double p2 = 4.0;
  double s1 = 0.5;
  double s2 = 0.0;
};

struct CommutatorResult {
  double defect_norm = 0.0;
  double bound = 0.0;  // ||Lambda^{s1} a||_{p1} ||Lambda^{s2} b||_{p2}
  double ratio = 0.0;  // 0 when the defect vanishes
};

/// Lambda^s(ab) - a Lambda^s b - b Lambda^s a with Lambda = (-Delta)^{1/2}.
/// Products are formed pointwise; inputs band-limited to a quarter of the
/// grid keep them alias-free.
Field commutator_field(const Field& a, const Field& b, double s);

/// Throws std::invalid_argument unless 0 < s < 1, s = s1 + s2 with
/// s1, s2 in [0, s], 1/p = 1/p1 + 1/p2 with p, p1, p2 in (1, inf), or
/// p1 = inf with s1 = 0.
CommutatorResult commutator_defect(const Field& a, const Field& b, const CommutatorExponents& e);

struct CutoffInequalityTerms {
  double lhs = 0.0;          // ||psi Lambda^alpha u||
  double local = 0.0;        // ||psi u|| + ||psi grad u||
  double far = 0.0;          // R^{-alpha/2} ||u||_{H^1}
  double C = 0.0;
  double rhs = 0.0;          // C (local + far)
  double margin = 0.0;       // rhs - lhs
};

/// Evaluates both sides of ||psi Lambda^alpha u|| <= C(||psi u|| + ||psi grad u||)
/// + C R^{-alpha/2} ||u||_{H^1} with a given constant C.
CutoffInequalityTerms cutoff_inequality_check(const Field& u, const CutoffPsi& psi, double alpha, double C);

/// safety * max lhs / (local + far) over a calibration ensemble of
/// (field, cut-off) pairs.
double calibrate_cutoff_inequality(std::span<const Field> fields, std::span<const CutoffPsi* const> psis, double alpha,
                         double safety = 1.5);

/// H_4 = 1/2 (||psi u_t||^2 + ||psi grad u||^2 + ||psi u||^2 + 2 int psi^2 (G(u) - f u))
///       + eps ((psi^2 u, u_t) + 1/2 (||psi u||^2 + ||psi Lambda^alpha u||^2)).
double tail_energy_H4(const State& s, const CutoffPsi& psi, const ModelParams& params, const LyapunovParams& lp);

/// sqrt of int_{|x| > r} (|u|^2 + |grad u|^2 + |u_t|^2 + d0 |u|^{p+1}), restricted to the box.
double tail_norm(const State& s, double r, const Nonlinearity& nl);

/// ||f||_{L^2(|x| > r)} within the box.
double field_tail_l2(const Field& f, double r);

struct TailRow {
  double R = 0.0;
  double tail_norm = 0.0;        // ||(u, u_t)(T)||_{H(|x| > 2R)}
  double f_tail = 0.0;           // ||f||_{L^2(|x| > R)}
  double shape = 0.0;            // R^{-alpha/2} + f_tail^2
  double predicted_bound = 0.0;  // fit * shape
  double H4_initial = 0.0;
  double H4_final = 0.0;
};

struct TailExperiment {
  std::vector<TailRow> rows;
  double fit_constant = 0.0;
  /// rms of log(tail / predicted) over the rows
  double fit_residual = 0.0;
  bool strictly_decreasing = false;
};

/// Evolves s0 to time T once, then measures the tail of the final state
/// outside 2R and the cut-off energy H_4 for each R.
TailExperiment tail_smallness_experiment(const State& s0, const ModelParams& params, const IntegratorConfig& cfg,
                                         std::span<const double> radii, double T, double delta,
                                         const LyapunovParams& lp);

std::string tail_table_header();
std::string tail_table_row(const TailRow& row);

}  // namespace fracdamp
