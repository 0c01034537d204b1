#pragma once

// Independent closed forms used as test oracles.

#include <array>
#include <complex>

namespace oracle {

using cd = std::complex<double>;

/// exp(tA) for A = [[0,1],[-b,-a]] by the two-eigenvalue Putzer formula,
/// row-major. Not valid at a double root.
inline std::array<double, 4> exp2x2(double a, double b, double t) {
  const cd disc = std::sqrt(cd(a * a - 4.0 * b, 0.0));
  const cd l1 = 0.5 * (-a + disc), l2 = 0.5 * (-a - disc);
  const cd e1 = std::exp(l1 * t), e2 = std::exp(l2 * t);
  const cd c0 = (l1 * e2 - l2 * e1) / (l1 - l2);
  const cd c1 = (e1 - e2) / (l1 - l2);
  return {(c0).real(), (c1).real(), (-b * c1).real(), (c0 - a * c1).real()};
}

/// int_0^h exp((h-s)A) e2 w(s) ds by composite Gauss-Legendre (5 points per cell).
template <class W>
std::array<double, 2> duhamel_column(double a, double b, double h, W&& w, int cells = 400) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double q[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  std::array<double, 2> out{0.0, 0.0};
  const double dh = h / cells;
  for (int c = 0; c < cells; ++c) {
    for (int i = 0; i < 5; ++i) {
      const double s = (c + 0.5) * dh + 0.5 * dh * x[i];
      const auto E = exp2x2(a, b, h - s);
      const double wt = 0.5 * dh * q[i] * w(s);
      out[0] += wt * E[1];
      out[1] += wt * E[3];
    }
  }
  return out;
}

}  // namespace oracle
