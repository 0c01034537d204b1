#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "fracdamp/grid.hpp"

namespace fracdamp {

enum class Representation { physical, spectral };

/// A real scalar function on a Grid, held either as point values or as
/// Fourier coefficients c_k with f(x) = sum_k c_k exp(i xi_k . x).
///
/// Physical values are stored as complex numbers with zero imaginary part so
/// both representations share one buffer type. Coefficients of a real field
/// are conjugate-symmetric.
class Field {
 public:
  explicit Field(GridPtr grid, Representation rep = Representation::physical);
  Field(GridPtr grid, std::span<const double> values);
  Field(GridPtr grid, std::vector<cplx> data, Representation rep);

  static Field from_function(GridPtr grid, const std::function<double(const std::array<double, 3>&)>& fn);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  bool is_spectral() const noexcept { return rep_ == Representation::spectral; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  /// Real point values; the field must be in physical representation.
  std::vector<double> values() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  void check_compatible(const Field& other) const;

  GridPtr grid_;
  Representation rep_;
  std::vector<cplx> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

Field to_spectral(const Field& f);
Field to_real(const Field& f);
Field with_representation(const Field& f, Representation rep);

/// Pointwise product of two fields (physical result).
Field product(const Field& a, const Field& b);

/// L^2 inner product (real part), computed in whichever representation the
/// inputs share; mixed inputs are compared spectrally.
double inner(const Field& a, const Field& b);

bool same_grid(const Field& a, const Field& b) noexcept;

}  // namespace fracdamp
