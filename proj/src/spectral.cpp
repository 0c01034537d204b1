#include "fracdamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fracdamp {

Field riesz_power(const Field& f, double s) {
  if (s == 0.0) return f;
  return apply_radial_multiplier(f, [s](double xi) { return xi > 0.0 ? std::pow(xi, s) : 0.0; });
}

Field bessel_power(const Field& f, double s) {
  if (s == 0.0) return f;
  return apply_radial_multiplier(f, [s](double xi) { return std::pow(1.0 + xi * xi, 0.5 * s); });
}

Field partial_derivative(const Field& f, const std::array<int, 3>& order) {
  Field out = to_spectral(f);
  const Grid& g = out.grid();
  auto k = g.wavenumbers_1d();
  auto d = out.data();
  const int half = g.modes_per_dim() / 2;
  for (std::size_t n = 0; n < d.size(); ++n) {
    auto slots = g.unflatten(n);
    cplx factor{1.0, 0.0};
    for (int ax = 0; ax < g.dim(); ++ax) {
      const int m = order[ax];
      if (m == 0) continue;
      if (slots[ax] == half && m % 2 == 1) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(cplx{0.0, k[slots[ax]]}, m);
    }
    d[n] *= factor;
  }
  return with_representation(out, f.representation());
}

Field band_limit(const Field& f, double kmax) {
  return apply_radial_multiplier(f, [kmax](double xi) { return xi <= kmax ? 1.0 : 0.0; });
}

Field dealias(const Field& f) {
  Field out = to_spectral(f);
  const int cut = out.grid().modes_per_dim() / 3;
  auto kabs = out.grid().max_abs_mode();
  auto d = out.data();
  for (std::size_t n = 0; n < d.size(); ++n)
    if (kabs[n] > cut) d[n] = 0.0;
  return with_representation(out, f.representation());
}

double sobolev_norm(const Field& f, const SobolevIndex& idx) {
  if (idx.q == 2.0) {
    Field c = to_spectral(f);
    const Grid& g = c.grid();
    auto xi = g.xi_norm();
    double sum = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
      double w;
      if (idx.homogeneous)
        w = idx.s == 0.0 ? 1.0 : (xi[n] > 0.0 ? std::pow(xi[n], 2.0 * idx.s) : 0.0);
      else
        w = std::pow(1.0 + xi[n] * xi[n], idx.s);
      sum += w * std::norm(c.data()[n]);
    }
    return std::sqrt(sum * std::pow(g.box_length(), g.dim()));
  }
  Field m = idx.homogeneous ? riesz_power(f, idx.s) : bessel_power(f, idx.s);
  return lp_norm(m, idx.q);
}

double lp_norm(const Field& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lp_norm requires q >= 1");
  Field p = to_real(f);
  auto d = p.data();
  if (std::isinf(q)) {
    double m = 0.0;
    for (const auto& c : d) m = std::max(m, std::abs(c.real()));
    return m;
  }
  double sum = 0.0;
  if (q == 2.0) {
    for (const auto& c : d) sum += c.real() * c.real();
  } else {
    for (const auto& c : d) sum += std::pow(std::abs(c.real()), q);
  }
  return std::pow(sum * p.grid().cell_volume(), 1.0 / q);
}

namespace {

void enumerate_multi_indices(int dim, int k, std::array<int, 3>& cur, int axis,
                             std::vector<std::array<int, 3>>& out) {
  if (axis == dim - 1) {
    cur[axis] = k;
    out.push_back(cur);
    return;
  }
  for (int m = 0; m <= k; ++m) {
    cur[axis] = m;
    enumerate_multi_indices(dim, k - m, cur, axis + 1, out);
  }
}

}  // namespace

double bernstein_ratio(const Field& f, double lambda, int k, double a, double b) {
  if (!(lambda > 0.0)) throw std::invalid_argument("bernstein_ratio requires lambda > 0");
  if (k < 0) throw std::invalid_argument("bernstein_ratio requires k >= 0");
  if (!(a >= 1.0) || !(b >= a)) throw std::invalid_argument("bernstein_ratio requires b >= a >= 1");

  Field u = band_limit(to_spectral(f), 2.0 * lambda);
  const double base = lp_norm(u, a);
  if (!(base > 0.0)) throw std::invalid_argument("degenerate input");

  const int dim = u.grid().dim();
  std::vector<std::array<int, 3>> betas;
  std::array<int, 3> cur{0, 0, 0};
  enumerate_multi_indices(dim, k, cur, 0, betas);

  double sup = 0.0;
  for (const auto& beta : betas) sup = std::max(sup, lp_norm(partial_derivative(u, beta), b));

  const double inv_a = 1.0 / a;
  const double inv_b = std::isinf(b) ? 0.0 : 1.0 / b;
  const double scale = std::pow(lambda, k + dim * (inv_a - inv_b));
  return sup / (scale * base);
}

}  // namespace fracdamp
