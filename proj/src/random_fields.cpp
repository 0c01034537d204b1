#include "fracdamp/random_fields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fracdamp/spectral.hpp"

namespace fracdamp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double mode_phase(std::uint64_t seed, const std::array<int, 3>& k) {
  std::uint64_t h = splitmix64(seed);
  for (int v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  return 2.0 * std::numbers::pi * static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

Field gaussian_bump(GridPtr grid, double amplitude, double sigma, std::array<double, 3> center) {
  return Field::from_function(grid, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < 3; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    return amplitude * std::exp(-r2 / (sigma * sigma));
  });
}

Field compact_bump(GridPtr grid, double amplitude, double radius) {
  return Field::from_function(grid, [&](const std::array<double, 3>& x) {
    const double t = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / radius;
    if (t >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  });
}

Field random_band_limited(GridPtr grid, double kmax, double l2_norm, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Field f(grid);
  for (auto& c : f.data()) c = normal(rng);
  Field s = band_limit(to_spectral(f), kmax);
  const double nrm = sobolev_norm(s, {});
  if (nrm == 0.0) throw std::invalid_argument("band limit removes every mode");
  s *= l2_norm / nrm;
  return to_real(s);
}

Field rough_field(GridPtr grid, double delta, double amplitude, std::uint64_t seed) {
  const Grid& g = *grid;
  Field c(grid, Representation::spectral);
  const double norm = 1.0 / std::sqrt(std::pow(g.box_length(), g.dim()));
  auto xi2 = g.xi_squared();
  auto d = c.data();
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (n == 0 || g.touches_nyquist(n)) continue;
    auto slots = g.unflatten(n);
    std::array<int, 3> k{0, 0, 0};
    for (int ax = 0; ax < g.dim(); ++ax) k[ax] = g.mode_index(slots[ax]);
    // Canonical member of the pair {k, -k}: first nonzero component positive.
    int first = 0;
    for (int ax = 0; ax < g.dim(); ++ax)
      if (k[ax] != 0) {
        first = k[ax];
        break;
      }
    std::array<int, 3> canon = k;
    if (first < 0)
      for (auto& v : canon) v = -v;
    double theta = mode_phase(seed, canon);
    if (first < 0) theta = -theta;
    const double mag = amplitude * norm * std::pow(1.0 + xi2[n], -0.25 * (g.dim() + delta));
    d[n] = std::polar(mag, theta);
  }
  return to_real(c);
}

Field cosine_mode(GridPtr grid, const std::array<int, 3>& k, double amplitude) {
  const double L = grid->box_length();
  return Field::from_function(grid, [&](const std::array<double, 3>& x) {
    double phase = 0.0;
    for (int d = 0; d < 3; ++d) phase += 2.0 * std::numbers::pi * k[d] * x[d] / L;
    return amplitude * std::cos(phase);
  });
}

}  // namespace fracdamp
