#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fracdamp {

using cplx = std::complex<double>;

/// Periodic box [-L/2, L/2)^N sampled with M points per dimension.
///
/// Spectral slots follow the FFT ordering: slot j in [0, M) carries the signed
/// mode index k = j for j < M/2 and k = j - M otherwise, with wavenumber
/// xi = 2*pi*k/L. The grid owns the FFT plans for its shape; plans are created
/// once at construction and executed concurrently by any number of threads.
class Grid {
 public:
  Grid(int dim, double box_length, int modes_per_dim);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dim() const noexcept { return dim_; }
  double box_length() const noexcept { return length_; }
  int modes_per_dim() const noexcept { return modes_; }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return length_ / modes_; }
  double cell_volume() const noexcept { return cell_volume_; }
  /// Largest resolved wavenumber along one axis, pi*M/L.
  double nyquist() const noexcept;

  int mode_index(int slot) const noexcept { return slot < modes_ / 2 ? slot : slot - modes_; }
  std::span<const double> wavenumbers_1d() const noexcept { return wavenumbers_; }

  /// |xi|^2 and |xi| per flat spectral index.
  std::span<const double> xi_squared() const noexcept { return xi2_; }
  std::span<const double> xi_norm() const noexcept { return xi_; }
  /// max_d |k_d| per flat spectral index (used by the 2/3 rule).
  std::span<const int> max_abs_mode() const noexcept { return max_abs_mode_; }
  /// True when some component of the flat index sits on the Nyquist slot.
  bool touches_nyquist(std::size_t flat) const noexcept { return max_abs_mode_[flat] == modes_ / 2; }

  std::array<int, 3> unflatten(std::size_t flat) const noexcept;
  std::size_t flatten(const std::array<int, 3>& slots) const noexcept;
  std::array<double, 3> position(std::size_t flat) const noexcept;
  double radius(std::size_t flat) const noexcept;

  bool same_shape(const Grid& other) const noexcept {
    return dim_ == other.dim_ && modes_ == other.modes_ && length_ == other.length_;
  }

  /// Unnormalized forward/backward DFT over the full M^N array.
  void forward_dft(std::span<const cplx> in, std::span<cplx> out) const;
  void backward_dft(std::span<const cplx> in, std::span<cplx> out) const;

  /// (-1)^(sum of slots): phase shift from the box offset x_0 = -L/2.
  std::span<const double> shift_sign() const noexcept { return shift_sign_; }

 private:
  struct Plans;

  int dim_;
  double length_;
  int modes_;
  std::size_t size_;
  double cell_volume_;
  std::vector<double> wavenumbers_;
  std::vector<double> xi2_;
  std::vector<double> xi_;
  std::vector<int> max_abs_mode_;
  std::vector<double> shift_sign_;
  std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, double box_length, int modes_per_dim);

}  // namespace fracdamp
