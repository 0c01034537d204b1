#pragma once

#include "fracdamp/field.hpp"

namespace fracdamp {

/// Critical growth exponents for dimension N and dissipative index alpha.
struct CriticalExponents {
  double p_star;   // (N+2)/(N-2)^+, infinite for N <= 2
  double p_alpha;  // (N+4 alpha)/(N-4 alpha)^+, infinite for N <= 4 alpha
};

CriticalExponents exponent_table(int dim, double alpha);

enum class NonlinearityForm {
  /// g(s) = C1 |s|^{p-1} s - C0 s
  power,
  /// g(s) = C1 s^3/(1+s^2) - C0 s; bounded derivative, growth exponent 1
  saturating,
};

/// The nonlinear term g with growth exponent p and the constants of the
/// two-sided derivative bounds C1 |s|^{p-1} - C0 <= g'(s) <= C (1 + |s|^{p-1}).
struct Nonlinearity {
  double p = 3.0;
  double c0 = 0.0;
  double c1 = 1.0;
  NonlinearityForm form = NonlinearityForm::power;

  double g(double s) const;
  double dg(double s) const;
  /// Antiderivative G(s) = int_0^s g.
  double G(double s) const;

  /// 0 when p <= p*, 1 when p* < p (the supercritical window).
  int d0(int dim) const;
  bool is_zero() const noexcept { return c0 == 0.0 && c1 == 0.0; }

  static Nonlinearity none() { return {1.0, 0.0, 0.0, NonlinearityForm::power}; }
  static Nonlinearity cubic() { return {3.0, 0.0, 1.0, NonlinearityForm::power}; }
};

/// Throws std::invalid_argument when p, C0, C1 or p versus p_alpha violate
/// the admissible window.
void validate(const Nonlinearity& nl, int dim, double alpha);

/// Pointwise g(f(x)), physical result. Throws StateBlowUp on overflow.
Field eval_g(const Nonlinearity& nl, const Field& f);

/// Pointwise g'(f(x)).
Field eval_dg(const Nonlinearity& nl, const Field& f);

/// Grid quadrature of int G(f(x)) dx.
double eval_G(const Nonlinearity& nl, const Field& f);

}  // namespace fracdamp
