#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracdamp/dynamics.hpp"

namespace fracdamp {

struct StabilityResult {
  /// sup_t ||(z, z_t)(t)||^2_{H_{-alpha}} / ||(z, z_t)(0)||^2_{H_{-alpha}}
  double C_of_T = 0.0;
  std::vector<double> t;
  /// ||(z, z_t)(t)||_{H_{-alpha}} per sample
  std::vector<double> distance;
  /// distance^2 / distance(0)^2 per sample
  std::vector<double> profile;
};

/// Evolves both data sets (in parallel) and tracks z = u - v in
/// H_{-alpha} = H^{1-alpha} x H^{-alpha}. Throws "blow-up in one branch" when
/// either run blows up; identical data give C_of_T = 0.
StabilityResult stability_experiment(const State& a, const State& b, const ModelParams& params,
                                     const IntegratorConfig& cfg, double T, int stride = 1);

/// ||[(-Delta)^{alpha1} - (-Delta)^{alpha2}] v||_{H^{-1}}, evaluated per mode.
double multiplier_gap(const Field& v, double alpha1, double alpha2);

struct SweepConfig {
  SweepConfig(State data_, ModelParams model_) : data(std::move(data_)), model(std::move(model_)) {}

  double alpha0 = 0.75;
  std::vector<double> deltas{0.05, 0.025, 0.0125};
  /// Held out from the assertion deltas; fixes the Duhamel-bound prefactor.
  double calibration_delta = 0.075;
  double calibration_safety = 1.5;
  State data;
  /// Nonlinearity and forcing shared by every branch; its alpha is ignored.
  ModelParams model;
  IntegratorConfig cfg;
  double T = 8.0;
  int stride = 4;
  /// Index of the comparison pair ||z||_{H^{1-gamma}} + ||z_t||_{H^{-gamma}}.
  double gamma = 0.5;
  /// Growth rate C in int_0^t e^{C(t - tau)} gap(tau)^2 dtau.
  double duhamel_rate = 1.0;
  /// When set, also sample each branch's attractor over [burn, burn + span].
  std::optional<double> attractor_burn;
  double attractor_span = 4.0;
  double attractor_spacing = 0.5;
};

/// Throws std::invalid_argument listing every violated sweep constraint:
/// alpha0 +- max delta inside (1/2, 1), deltas positive and decreasing, max
/// delta below min{alpha0 - 1/2, alpha0/3, (1 - alpha0)/3}, and p below
/// p_{alpha0 - max delta}.
void validate(const SweepConfig& cfg);

struct SweepRow {
  double delta = 0.0;
  double sup_distance = 0.0;
  double duhamel_bound = 0.0;  // sup_t of the Duhamel integral
  /// max_t distance(t)^2 / (K * bound(t)); <= 1 means the bound holds pointwise.
  double worst_bound_ratio = 0.0;
  double semidistance = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> t;
  std::vector<double> distance;
  std::vector<double> bound;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepRow calibration;
  double prefactor = 0.0;  // K
  bool distance_strictly_decreasing = false;
  bool bound_holds = false;
  bool semidistance_nonincreasing = true;
};

/// Runs alpha0 and alpha0 + delta for each delta (branches concurrently)
/// from the same data and measures their distance against the Duhamel bound.
SweepResult alpha_sweep(const SweepConfig& cfg);

std::string sweep_table_header();
std::string sweep_table_row(const SweepRow& row);

struct AttractorSample {
  double alpha = 0.0;
  std::vector<double> times;
  std::vector<State> snapshots;
  std::vector<double> norm_H;
  std::vector<double> norm_H_alpha;
  /// max pairwise H distance in the cloud
  double diameter = 0.0;
};

/// Integrates to t_burn, checks that the H norm has settled (change over
/// [t_burn/2, t_burn] at most 5% of its initial value), then records
/// snapshots every `spacing` over [t_burn, t_burn + span]. Throws
/// "not yet absorbed" when the check fails or a snapshot leaves the cap
/// 2 max(||.||_{H_alpha}(t_burn), ||.||_{H_alpha}(0)).
AttractorSample attractor_sample(const State& s0, const ModelParams& params, const IntegratorConfig& cfg,
                                 double t_burn, double span, double spacing);

/// max_{a in A} min_{b in B} ||a - b||_H. Throws on an empty sample.
double attractor_semidistance(const AttractorSample& A, const AttractorSample& B,
                              const Nonlinearity& nl = Nonlinearity::none());

/// Time average of the u components of the cloud.
Field cloud_mean(const AttractorSample& A);

/// ||-Delta u + u + g(u) - f||_{H^{-1}} / ||f||_{H^{-1}} (unnormalized when f = 0).
double elliptic_residual(const Field& u, const ModelParams& params);

}  // namespace fracdamp
