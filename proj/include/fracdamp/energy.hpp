#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracdamp/dynamics.hpp"

namespace fracdamp {

struct CutoffPsi;

/// Multiplier weight epsilon of the Lyapunov functional and a decay rate kappa
/// (an output of fits; carried along so assertions can use it).
struct LyapunovParams {
  double epsilon = 0.25;
  double kappa = 0.0;
};

/// E = 1/2 (||v||^2 + ||u||_{Hdot^1}^2 + ||u||^2) + int G(u) - (f, u).
/// With `l` set, G and f act on S_l u and S_l f (the mollified problem).
double total_energy(const State& s, const ModelParams& params, std::optional<int> l = {});

/// ||v||_{Hdot^alpha}^2 + ||v||^2, the rate at which E is dissipated.
double dissipation(const State& s, double alpha);

/// H = E + eps ((u, v) + 1/2 (||u||_{Hdot^alpha}^2 + ||u||^2)).
double lyapunov_H(const State& s, const ModelParams& params, const LyapunovParams& lp, std::optional<int> l = {});

/// Phi = ||v||_{Hdot^alpha}^2 + (1 - eps) ||v||^2
///       + eps (||u||_{Hdot^1}^2 + ||u||^2 + (g(u), u) - (f, u)),
/// so that dH/dt + Phi = 0 along solutions.
double dissipation_Phi(const State& s, const ModelParams& params, const LyapunovParams& lp,
                       std::optional<int> l = {});

/// Largest eps = 2^-k (k >= 1) for which, on a deterministic probe ensemble,
/// H + 2 ||f||^2 >= (1 - C0)/4 (||v||^2 + ||u||_{H^1}^2) and Phi - eps H >= 0.
LyapunovParams calibrate_epsilon(const ModelParams& params, std::uint64_t seed = 2024, int probes = 100);

/// H_2(z, z_t) = ||z_t||_{H^-gamma}^2 + ||z||_{H^{1-gamma}}^2
///               + eps (||z||_{Hdot^alpha}^2 + ||z||^2 + 2 (z, z_t)).
double functional_H2(const State& z, double alpha, double gamma, double eps);

/// H_3(u) = ||u||_{Hdot^{1+alpha}}^2 + ||u||_{Hdot^1}^2 + ||u||^2.
double functional_H3(const Field& u, double alpha);

/// Time series of E and its dissipation, sampled on a trajectory.
struct EnergySeries {
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> D;
};

/// Observer callback appending (t, E, D) of every state it sees.
std::function<void(const State&)> energy_recorder(const ModelParams& params, EnergySeries& out,
                                                  std::optional<int> l = {});

EnergySeries energy_series(const Trajectory& traj, const ModelParams& params, std::optional<int> l = {});

/// |E(t_i) + int_{t_0}^{t_i} D - E(t_0)| / max_j |E(t_j)| for every sample,
/// the integral by the trapezoid rule on the samples.
std::vector<double> energy_equality_residual(const EnergySeries& series);
std::vector<double> energy_equality_residual(const Trajectory& traj, const ModelParams& params);

/// value(t) ~ A exp(-kappa t) + B with A, B >= 0, fitted in relative least
/// squares. Throws FitFailed for fewer than 10 samples, non-positive values,
/// or a rise above the running minimum by more than monotone_tol times the
/// value range.
struct DecayFit {
  double kappa = 0.0;
  double amplitude = 0.0;
  double floor = 0.0;
  double residual = 0.0;  // rms relative misfit
};

DecayFit decay_fit(std::span<const double> t, std::span<const double> values, double monotone_tol = 0.05);

/// u_tt = Delta u - (-Delta)^alpha u_t - u_t - u - g(u) + f, spectral result.
Field reconstruct_utt(const State& s, const ModelParams& params);

struct SmoothingRun {
  const Trajectory* traj = nullptr;
  const ModelParams* params = nullptr;
};

struct SmoothingRow {
  double t = 0.0;
  int modes = 0;
  double weighted_ut = 0.0;   // t^2 ||u_t||_{H^alpha}^2
  double weighted_utt = 0.0;  // t^2 ||u_tt||_{H^-alpha}^2
  double u_H1alpha = 0.0;     // ||u||_{H^{1+alpha}}
  double weighted_H3 = 0.0;   // (t - a/2)^{1/(1-alpha)} H_3(u), 0 for t <= a/2
};

struct SmoothingReport {
  std::vector<SmoothingRow> rows;
  /// max over sample times of (largest / smallest) t^2 ||u_t||_{H^alpha}^2
  /// across the runs.
  double resolution_spread = 1.0;
  /// Least-squares slope of log ||u_t||_{H^alpha}^2 against log t over the
  /// sample times, first run. Logged, not asserted.
  double small_t_exponent = 0.0;
  /// (C alpha/(1 - alpha))^{alpha/(1-alpha)} with C = 1.
  double c_alpha = 0.0;
};

/// Evaluates the weighted smoothing quantities at the requested times on
/// every run (runs typically differ only in resolution). Each time must be
/// on the run's sample grid to within half a step.
SmoothingReport smoothing_report(std::span<const SmoothingRun> runs, std::span<const double> times,
                                 double a = 0.0);

/// One row of per-time diagnostics.
struct EnergyReport {
  double t = 0.0;
  double E = 0.0;
  double H = 0.0;
  double Phi = 0.0;
  double H2 = 0.0;  // of (u_t, u_tt) with gamma = alpha
  double H3 = 0.0;
  double R = 0.0;   // radius of the cut-off used for H4 (0 when none)
  double H4 = 0.0;
  double u_H1 = 0.0;
  double u_Lp1 = 0.0;
  double ut_L2 = 0.0;
  double ut_Halpha = 0.0;
  double u_H1alpha = 0.0;
  double ut_Hminus_alpha = 0.0;
};

EnergyReport energy_report(const State& s, const ModelParams& params, const LyapunovParams& lp,
                           const CutoffPsi* psi = nullptr);

std::string energy_report_header();
std::string energy_report_row(const EnergyReport& r);

}  // namespace fracdamp
