#pragma once

#include <vector>

#include "fracdamp/field.hpp"

namespace fracdamp {

/// Radial low-pass profile: 1 on [0,1], 0 on [2,inf), smooth monotone step
/// in between.
double cutoff_profile(double r);

/// Low-pass at scale 2^l: coefficients multiplied by cutoff_profile(|xi|/2^l).
/// Throws "cutoff exceeds Nyquist" when 2^{l+1} > pi*M/L.
Field apply_Sl(const Field& f, int l);

/// |(S_l f, g) - (f, S_l g)| / (||f|| ||g||). Zero when either field vanishes.
double sl_selfadjoint_defect(const Field& f, const Field& g, int l);

/// ||S_l f - f||_{H^m} for each l in `levels`, evaluated as the exact
/// spectral residual (no Nyquist restriction).
std::vector<double> sl_convergence_curve(const Field& f, double m, const std::vector<int>& levels);

/// Discrete L^1 norm of the real-space kernel of S_l on this grid. Young's
/// inequality on the grid gives ||S_l f||_q <= kernel_l1_norm * ||f||_q.
double kernel_l1_norm(GridPtr grid, int l);

}  // namespace fracdamp
