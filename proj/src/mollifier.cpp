#include "fracdamp/mollifier.hpp"

#include <cmath>
#include <stdexcept>

#include "fracdamp/spectral.hpp"

namespace fracdamp {

namespace {

double smooth_zero(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double scale_of(int l) { return std::ldexp(1.0, l); }

}  // namespace

double cutoff_profile(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  const double a = smooth_zero(1.0 - t);
  const double b = smooth_zero(t);
  return a / (a + b);
}

Field apply_Sl(const Field& f, int l) {
  const double scale = scale_of(l);
  if (2.0 * scale > f.grid().nyquist()) throw std::invalid_argument("cutoff exceeds Nyquist");
  return apply_radial_multiplier(f, [scale](double xi) { return cutoff_profile(xi / scale); });
}

double sl_selfadjoint_defect(const Field& f, const Field& g, int l) {
  const double nf = sobolev_norm(f, {});
  const double ng = sobolev_norm(g, {});
  if (nf == 0.0 || ng == 0.0) return 0.0;
  return std::abs(inner(apply_Sl(f, l), g) - inner(f, apply_Sl(g, l))) / (nf * ng);
}

std::vector<double> sl_convergence_curve(const Field& f, double m, const std::vector<int>& levels) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (int l : levels) {
    const double scale = scale_of(l);
    Field residual = apply_radial_multiplier(f, [scale](double xi) { return 1.0 - cutoff_profile(xi / scale); });
    out.push_back(sobolev_norm(residual, {.s = m}));
  }
  return out;
}

double kernel_l1_norm(GridPtr grid, int l) {
  Field c(grid, Representation::spectral);
  const double scale = scale_of(l);
  const double inv_volume = 1.0 / std::pow(grid->box_length(), grid->dim());
  auto xi = grid->xi_norm();
  auto d = c.data();
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = cutoff_profile(xi[n] / scale) * inv_volume;
  return lp_norm(to_real(c), 1.0);
}

}  // namespace fracdamp
