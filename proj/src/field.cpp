#include "fracdamp/field.hpp"

#include <cmath>
#include <stdexcept>

namespace fracdamp {

Field::Field(GridPtr grid, Representation rep) : grid_(std::move(grid)), rep_(rep) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  data_.assign(grid_->size(), cplx{0.0, 0.0});
}

Field::Field(GridPtr grid, std::span<const double> values) : Field(std::move(grid)) {
  if (values.size() != data_.size()) throw std::invalid_argument("field value count does not match grid");
  for (std::size_t i = 0; i < values.size(); ++i) data_[i] = values[i];
}

Field::Field(GridPtr grid, std::vector<cplx> data, Representation rep)
    : grid_(std::move(grid)), rep_(rep), data_(std::move(data)) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  if (data_.size() != grid_->size()) throw std::invalid_argument("field data size does not match grid");
}

Field Field::from_function(GridPtr grid, const std::function<double(const std::array<double, 3>&)>& fn) {
  Field f(grid);
  for (std::size_t n = 0; n < f.size(); ++n) f.data_[n] = fn(grid->position(n));
  return f;
}

std::vector<double> Field::values() const {
  if (is_spectral()) throw std::logic_error("values() requires a physical-space field");
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i].real();
  return out;
}

void Field::check_compatible(const Field& other) const {
  if (!grid_->same_shape(other.grid())) throw std::invalid_argument("fields live on different grids");
  if (rep_ != other.rep_) throw std::invalid_argument("fields have different representations");
}

Field& Field::operator+=(const Field& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& c : data_) c *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field to_spectral(const Field& f) {
  if (f.is_spectral()) return f;
  const Grid& g = f.grid();
  std::vector<cplx> out(g.size());
  g.forward_dft(f.data(), out);
  const double inv = 1.0 / static_cast<double>(g.size());
  auto sign = g.shift_sign();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= inv * sign[n];
  return Field(f.grid_ptr(), std::move(out), Representation::spectral);
}

Field to_real(const Field& f) {
  if (!f.is_spectral()) return f;
  const Grid& g = f.grid();
  std::vector<cplx> in(f.data().begin(), f.data().end());
  auto sign = g.shift_sign();
  for (std::size_t n = 0; n < in.size(); ++n) in[n] *= sign[n];
  std::vector<cplx> out(g.size());
  g.backward_dft(in, out);
  for (auto& c : out) c = cplx{c.real(), 0.0};
  return Field(f.grid_ptr(), std::move(out), Representation::physical);
}

Field with_representation(const Field& f, Representation rep) {
  return rep == Representation::spectral ? to_spectral(f) : to_real(f);
}

Field product(const Field& a, const Field& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("fields live on different grids");
  Field pa = to_real(a);
  Field pb = to_real(b);
  auto da = pa.data();
  auto db = pb.data();
  for (std::size_t i = 0; i < da.size(); ++i) da[i] = cplx{da[i].real() * db[i].real(), 0.0};
  return pa;
}

double inner(const Field& a, const Field& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("fields live on different grids");
  const Grid& g = a.grid();
  if (!a.is_spectral() && !b.is_spectral()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i].real() * b.data()[i].real();
    return s * g.cell_volume();
  }
  Field sa = to_spectral(a);
  Field sb = to_spectral(b);
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += (sa.data()[i] * std::conj(sb.data()[i])).real();
  return s * std::pow(g.box_length(), g.dim());
}

bool same_grid(const Field& a, const Field& b) noexcept { return a.grid().same_shape(b.grid()); }

}  // namespace fracdamp
