#include "fracdamp/nonlinearity.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fracdamp/errors.hpp"
#include "fracdamp/spectral.hpp"

namespace fracdamp {

CriticalExponents exponent_table(int dim, double alpha) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  CriticalExponents e{};
  e.p_star = dim > 2 ? (dim + 2.0) / (dim - 2.0) : kInfinity;
  const double gap = dim - 4.0 * alpha;
  e.p_alpha = gap > 0.0 ? (dim + 4.0 * alpha) / gap : kInfinity;
  return e;
}

double Nonlinearity::g(double s) const {
  switch (form) {
    case NonlinearityForm::power:
      return c1 * std::pow(std::abs(s), p - 1.0) * s - c0 * s;
    case NonlinearityForm::saturating:
      return c1 * s * s * s / (1.0 + s * s) - c0 * s;
  }
  return 0.0;
}

double Nonlinearity::dg(double s) const {
  switch (form) {
    case NonlinearityForm::power:
      return c1 * p * std::pow(std::abs(s), p - 1.0) - c0;
    case NonlinearityForm::saturating: {
      const double q = 1.0 + s * s;
      return c1 * s * s * (3.0 + s * s) / (q * q) - c0;
    }
  }
  return 0.0;
}

double Nonlinearity::G(double s) const {
  switch (form) {
    case NonlinearityForm::power:
      return c1 * std::pow(std::abs(s), p + 1.0) / (p + 1.0) - 0.5 * c0 * s * s;
    case NonlinearityForm::saturating:
      return c1 * (0.5 * s * s - 0.5 * std::log1p(s * s)) - 0.5 * c0 * s * s;
  }
  return 0.0;
}

int Nonlinearity::d0(int dim) const {
  const double p_star = dim > 2 ? (dim + 2.0) / (dim - 2.0) : kInfinity;
  return p > p_star ? 1 : 0;
}

void validate(const Nonlinearity& nl, int dim, double alpha) {
  std::ostringstream err;
  if (!(nl.p >= 1.0)) err << "growth exponent p must be >= 1; ";
  if (!(nl.c0 >= 0.0 && nl.c0 < 1.0)) err << "C0 must lie in [0,1); ";
  if (!(nl.c1 >= 0.0)) err << "C1 must be nonnegative; ";
  const auto e = exponent_table(dim, alpha);
  if (nl.form == NonlinearityForm::power && nl.p >= e.p_alpha) {
    std::ostringstream msg;
    msg << "p ≥ p_α = " << e.p_alpha << "; ";
    err << msg.str();
  }
  if (nl.form == NonlinearityForm::saturating && nl.p != 1.0) err << "saturating form has growth exponent 1; ";
  auto s = err.str();
  if (!s.empty()) throw std::invalid_argument(s.substr(0, s.size() - 2));
}

Field eval_g(const Nonlinearity& nl, const Field& f) {
  Field out = to_real(f);
  for (auto& c : out.data()) {
    const double v = nl.g(c.real());
    if (!std::isfinite(v)) throw StateBlowUp("nonlinearity overflow");
    c = v;
  }
  return out;
}

Field eval_dg(const Nonlinearity& nl, const Field& f) {
  Field out = to_real(f);
  for (auto& c : out.data()) c = nl.dg(c.real());
  return out;
}

double eval_G(const Nonlinearity& nl, const Field& f) {
  Field p = to_real(f);
  double sum = 0.0;
  for (const auto& c : p.data()) sum += nl.G(c.real());
  if (!std::isfinite(sum)) throw StateBlowUp("nonlinearity overflow");
  return sum * p.grid().cell_volume();
}

}  // namespace fracdamp
