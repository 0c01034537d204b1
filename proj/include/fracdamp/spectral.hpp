#pragma once

#include <array>
#include <limits>

#include "fracdamp/field.hpp"

namespace fracdamp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Order s and integrability q of a Bessel (H^{s,q}) or Riesz (Hdot^{s,q})
/// potential space.
struct SobolevIndex {
  double s = 0.0;
  double q = 2.0;
  bool homogeneous = false;
};

/// Multiplies every spectral coefficient by m(|xi|). The result keeps the
/// representation of the input.
template <class Multiplier>
Field apply_radial_multiplier(const Field& f, Multiplier&& m) {
  Field out = to_spectral(f);
  auto xi = out.grid().xi_norm();
  auto d = out.data();
  for (std::size_t n = 0; n < d.size(); ++n) d[n] *= m(xi[n]);
  return with_representation(out, f.representation());
}

/// (-Delta)^{s/2}: multiplier |xi|^s. The zero mode is set to 0 for every
/// s != 0 (it is |0|^s = 0 for s > 0 and annihilated by convention for s < 0).
Field riesz_power(const Field& f, double s);

/// (I - Delta)^{s/2}: multiplier (1 + |xi|^2)^{s/2}.
Field bessel_power(const Field& f, double s);

/// Partial derivative with multi-index `order` (per-axis derivative counts).
/// Nyquist slots of odd-order axes are zeroed so the result stays real.
Field partial_derivative(const Field& f, const std::array<int, 3>& order);

/// Zeroes every coefficient with |xi| > kmax.
Field band_limit(const Field& f, double kmax);

/// 2/3 rule: zeroes every coefficient with max_d |k_d| > M/3.
Field dealias(const Field& f);

/// ||(I-Delta)^{s/2} f||_q, or the Riesz variant when idx.homogeneous.
/// For q = 2 this is evaluated by Plancherel on the coefficients.
double sobolev_norm(const Field& f, const SobolevIndex& idx);

/// Rectangle-rule L^q norm; q = kInfinity gives max |f|.
double lp_norm(const Field& f, double q);

/// sup_{|beta|=k} ||d^beta f||_{L^b} / (lambda^{k + N(1/a - 1/b)} ||f||_{L^a})
/// after projecting f onto |xi| <= 2 lambda. Throws on a zero field.
double bernstein_ratio(const Field& f, double lambda, int k, double a, double b);

}  // namespace fracdamp
