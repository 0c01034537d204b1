#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracdamp/field.hpp"
#include "fracdamp/nonlinearity.hpp"

namespace fracdamp {

/// xi_u = (u, u_t) at time t. Both fields share one grid.
struct State {
  Field u;
  Field v;
  double t = 0.0;
};

State zero_state(GridPtr grid);
State make_state(Field u, Field v, double t = 0.0);

/// u_tt - Delta u + (-Delta)^alpha u_t + u_t + u + g(u) = f on the grid's torus.
struct ModelParams {
  double alpha = 0.75;
  Nonlinearity nl = Nonlinearity::cubic();
  Field forcing;

  ModelParams(GridPtr grid, double alpha_, Nonlinearity nl_);
  ModelParams(double alpha_, Nonlinearity nl_, Field forcing_);

  const Grid& grid() const noexcept { return forcing.grid(); }
  const GridPtr& grid_ptr() const noexcept { return forcing.grid_ptr(); }
};

/// Throws std::invalid_argument listing every violated model constraint.
void validate(const ModelParams& params);

enum class Scheme { duhamel_etd, reference_rk4 };

struct IntegratorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::duhamel_etd;
  bool dealias = true;
  /// When set, evolve the mollified problem with S_l applied around g and to f.
  std::optional<int> l_trunc;
};

/// Exact solution operator of one Fourier mode of the linear block system
/// d/dt (u, v) = [[0, 1], [-stiffness, -damping]] (u, v) + (0, n) over a step h,
/// with n either frozen (phi1) or linear in time (phi2).
///
/// E is row-major; phi1 = h*phi_1(hA) e_2 and phi2 = h*phi_2(hA) e_2 are the
/// columns that multiply the forcing.
struct ModePropagator {
  std::array<double, 4> E{};
  std::array<double, 2> phi1{};
  std::array<double, 2> phi2{};
};

ModePropagator mode_propagator(double damping, double stiffness, double h);

/// Per-mode coefficients of the block operator: damping |xi|^{2 alpha} + 1 and
/// stiffness |xi|^2 + 1.
double mode_damping(double xi, double alpha);
double mode_stiffness(double xi);

/// Largest admissible step of the scheme on this model.
double stability_bound(const ModelParams& params, Scheme scheme);

/// Reusable stepping engine. Holds per-mode propagators for a fixed step and
/// the spectral forcing; states passed in may use either representation and
/// come back spectral.
class Integrator {
 public:
  Integrator(ModelParams params, IntegratorConfig cfg);

  State step(const State& s) const;

  /// F(u) = f - g(u) (or S_l f - S_l g(S_l u)) as spectral coefficients,
  /// dealiased when the config asks for it.
  Field nonlinear_forcing(const Field& u) const;

  const ModelParams& params() const noexcept { return params_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }
  std::span<const ModePropagator> propagators() const noexcept { return props_; }
  std::span<const double> damping() const noexcept { return damping_; }
  std::span<const double> stiffness() const noexcept { return stiffness_; }

 private:
  State step_etd(const State& s) const;
  State step_rk4(const State& s) const;
  void check_finite(const State& s) const;

  ModelParams params_;
  IntegratorConfig cfg_;
  Field forcing_hat_;
  std::vector<double> cutoff_;
  std::vector<double> damping_;
  std::vector<double> stiffness_;
  std::vector<ModePropagator> props_;
};

/// Sigma(dt) applied mode by mode; no forcing.
State linear_semigroup_step(const State& s, const ModelParams& params, double dt);

/// One Duhamel/ETD2RK step (or RK4 when cfg.scheme says so).
State duhamel_step(const State& s, const ModelParams& params, const IntegratorConfig& cfg);

struct ObserverSpec {
  /// Record every `stride` steps; step 0 and the final step are always recorded.
  int stride = 1;
  bool store = true;
  std::function<void(const State&)> callback;
};

struct Trajectory {
  std::vector<State> states;

  bool empty() const noexcept { return states.empty(); }
  const State& back() const { return states.back(); }
};

/// Evolves s0 to time s0.t + T. T must be an integer multiple of cfg.dt.
Trajectory integrate(const State& s0, const ModelParams& params, const IntegratorConfig& cfg, double T,
                     const ObserverSpec& observers = {});

/// Mollified problem: data and f replaced by their S_l truncations and g(u)
/// by S_l g(S_l u).
Trajectory integrate_auxiliary(const State& s0, const ModelParams& params, int l, IntegratorConfig cfg, double T,
                               const ObserverSpec& observers = {});

struct PicardOptions {
  int steps = 200;
  int pairs = 6;
  /// X_alpha size of the random perturbation paths, relative to the data.
  double perturbation = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-13;
  std::uint64_t seed = 7;
  bool dealias = true;
};

struct PicardReport {
  double contraction_ratio = 0.0;  // max over pairs
  std::vector<double> pair_ratios;
  int iterations = 0;
  bool converged = false;
  std::vector<double> iterate_increments;
  /// max_t ||U_fix - U_int||_{X_alpha} / max_t ||U_int||_{X_alpha}
  double deviation_from_integrator = 0.0;
  std::string status;  // "contraction" or "no contraction at this T"
};

/// Measures the contraction factor of the Duhamel map on C([0,T]; X_alpha)
/// for the mollified problem, then runs the Picard iteration to its fixed
/// point and compares it with integrate_auxiliary on the same time grid.
PicardReport picard_contraction_demo(const State& s0, const ModelParams& params, int l, double T,
                                     const PicardOptions& options = {});

/// ||(u, v)||_{X_alpha}, X_alpha = H^{2 alpha + 1} x H^{2 alpha}.
double norm_X_alpha(const State& s, double alpha);
/// ||(u, v)||_{H}: sqrt(||u||_{H^1}^2 + d0 ||u||_{p+1}^2 + ||v||^2).
double norm_H(const State& s, const Nonlinearity& nl);
/// ||(u, v)||_{H_alpha}: sqrt(||u||_{H^{1+alpha}}^2 + ||v||_{H^alpha}^2).
double norm_H_alpha(const State& s, double alpha);
/// ||(u, v)||_{H_{-gamma}}: sqrt(||u||_{H^{1-gamma}}^2 + ||v||_{H^{-gamma}}^2).
double norm_H_minus(const State& s, double gamma);

State difference(const State& a, const State& b);

/// Trajectory CSV: a "# schema=..." line with the grid shape, a header row,
/// then one row per (time, mode): t,mode,k1[,k2,k3],u_re,u_im,v_re,v_im.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace fracdamp
