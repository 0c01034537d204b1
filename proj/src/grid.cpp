#include "fracdamp/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fracdamp {

namespace {

// fftw_plan_* is not re-entrant; fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Grid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Grid::Grid(int dim, double box_length, int modes_per_dim)
    : dim_(dim), length_(box_length), modes_(modes_per_dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (!(box_length > 0.0)) throw std::invalid_argument("box length must be positive");
  if (modes_per_dim < 8 || modes_per_dim % 2 != 0)
    throw std::invalid_argument("modes per dimension must be even and at least 8");

  size_ = 1;
  for (int d = 0; d < dim_; ++d) size_ *= static_cast<std::size_t>(modes_);
  cell_volume_ = std::pow(spacing(), dim_);

  wavenumbers_.resize(modes_);
  for (int j = 0; j < modes_; ++j)
    wavenumbers_[j] = 2.0 * std::numbers::pi * mode_index(j) / length_;

  xi2_.resize(size_);
  xi_.resize(size_);
  max_abs_mode_.resize(size_);
  shift_sign_.resize(size_);
  for (std::size_t n = 0; n < size_; ++n) {
    auto slots = unflatten(n);
    double s2 = 0.0;
    int kmax = 0;
    int parity = 0;
    for (int d = 0; d < dim_; ++d) {
      s2 += wavenumbers_[slots[d]] * wavenumbers_[slots[d]];
      kmax = std::max(kmax, std::abs(mode_index(slots[d])));
      parity += slots[d];
    }
    xi2_[n] = s2;
    xi_[n] = std::sqrt(s2);
    max_abs_mode_[n] = kmax;
    shift_sign_[n] = (parity % 2 == 0) ? 1.0 : -1.0;
  }

  plans_ = std::make_unique<Plans>();
  std::vector<int> shape(dim_, modes_);
  std::vector<cplx> a(size_), b(size_);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft(dim_, shape.data(), pa, pb, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft(dim_, shape.data(), pa, pb, FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

Grid::~Grid() = default;

double Grid::nyquist() const noexcept { return std::numbers::pi * modes_ / length_; }

std::array<int, 3> Grid::unflatten(std::size_t flat) const noexcept {
  std::array<int, 3> s{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    s[d] = static_cast<int>(flat % modes_);
    flat /= modes_;
  }
  return s;
}

std::size_t Grid::flatten(const std::array<int, 3>& slots) const noexcept {
  std::size_t n = 0;
  for (int d = 0; d < dim_; ++d) n = n * modes_ + static_cast<std::size_t>(slots[d]);
  return n;
}

std::array<double, 3> Grid::position(std::size_t flat) const noexcept {
  auto s = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[d] = -0.5 * length_ + s[d] * spacing();
  return x;
}

double Grid::radius(std::size_t flat) const noexcept {
  auto x = position(flat);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

void Grid::forward_dft(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size_ || out.size() != size_) throw std::invalid_argument("dft size mismatch");
  // FFTW does not write to the input of an out-of-place complex transform.
  auto* pin = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plans_->forward, pin, reinterpret_cast<fftw_complex*>(out.data()));
}

void Grid::backward_dft(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size_ || out.size() != size_) throw std::invalid_argument("dft size mismatch");
  auto* pin = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plans_->backward, pin, reinterpret_cast<fftw_complex*>(out.data()));
}

GridPtr make_grid(int dim, double box_length, int modes_per_dim) {
  return std::make_shared<const Grid>(dim, box_length, modes_per_dim);
}

}  // namespace fracdamp
