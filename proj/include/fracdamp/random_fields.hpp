#pragma once

#include <cstdint>
#include <random>

#include "fracdamp/field.hpp"

namespace fracdamp {

/// a * exp(-|x - center|^2 / sigma^2)
Field gaussian_bump(GridPtr grid, double amplitude, double sigma, std::array<double, 3> center = {0, 0, 0});

/// a * exp(1 - 1/(1 - (|x|/radius)^2)) inside the ball, 0 outside. Smooth with
/// compact support; peak value a at the origin.
Field compact_bump(GridPtr grid, double amplitude, double radius);

/// White noise in physical space projected onto |xi| <= kmax and scaled to
/// the requested L^2 norm.
Field random_band_limited(GridPtr grid, double kmax, double l2_norm, std::mt19937_64& rng);

/// Rough field with coefficients amplitude * (1+|xi|^2)^{-(N+delta)/4} / sqrt(L^N)
/// and a random phase per mode. The phase of mode k depends only on (seed, k),
/// so grids sharing L produce the same function on their common modes.
/// Nyquist slots and the zero mode are left empty.
Field rough_field(GridPtr grid, double delta, double amplitude, std::uint64_t seed);

/// Real field with one cosine mode: amplitude * cos(xi_k . x) for the integer
/// mode vector k.
Field cosine_mode(GridPtr grid, const std::array<int, 3>& k, double amplitude);

}  // namespace fracdamp
