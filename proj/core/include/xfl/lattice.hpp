#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "xfl/error.hpp"
#include "xfl/grid.hpp"

namespace xfl {

using cplx = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = std::is_same_v<T, cplx>;

template <class T>
inline bool finite_value(const T& v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

/// N-component field sampled on a Grid3.
///
/// Storage is component-major: component c occupies the contiguous range
/// [c * sites, (c + 1) * sites), each range ordered x-fastest like the grid.
/// The on-disk format interleaves components per site; see field_io.hpp.
template <class T, std::size_t N>
class Lattice {
 public:
  using value_type = T;
  static constexpr std::size_t kComponents = N;

  explicit Lattice(Grid3 grid) : grid_(std::move(grid)), data_(grid_.sites() * N, T{}) {}
  Lattice(Grid3 grid, T fill) : grid_(std::move(grid)), data_(grid_.sites() * N, fill) {}

  const Grid3& grid() const { return grid_; }
  std::size_t sites() const { return grid_.sites(); }

  std::span<T> component(std::size_t c) { return {data_.data() + c * sites(), sites()}; }
  std::span<const T> component(std::size_t c) const {
    return {data_.data() + c * sites(), sites()};
  }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T& operator()(std::size_t c, std::size_t site) { return data_[c * sites() + site]; }
  const T& operator()(std::size_t c, std::size_t site) const { return data_[c * sites() + site]; }
  T& at(std::size_t c, std::size_t i, std::size_t j, std::size_t k) {
    return (*this)(c, grid_.index(i, j, k));
  }
  const T& at(std::size_t c, std::size_t i, std::size_t j, std::size_t k) const {
    return (*this)(c, grid_.index(i, j, k));
  }

  bool all_finite() const {
    for (const auto& v : data_) {
      if (!finite_value(v)) return false;
    }
    return true;
  }

  /// Largest |value| over all components and sites.
  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }

  Lattice& operator+=(const Lattice& o) {
    require_same_grid(grid_, o.grid_, "lattice +=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  Lattice& operator-=(const Lattice& o) {
    require_same_grid(grid_, o.grid_, "lattice -=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  Lattice& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Lattice operator+(Lattice a, const Lattice& b) { return a += b; }
  friend Lattice operator-(Lattice a, const Lattice& b) { return a -= b; }
  friend Lattice operator*(T s, Lattice a) { return a *= s; }

 private:
  Grid3 grid_;
  std::vector<T> data_;
};

using ScalarLattice = Lattice<double, 1>;
using ComplexLattice = Lattice<cplx, 1>;
using Vector3Lattice = Lattice<double, 3>;
using FourVectorLattice = Lattice<double, 4>;
using ComplexFourVectorLattice = Lattice<cplx, 4>;
using SpinorLattice = Lattice<cplx, 4>;

/// Lift a real lattice to complex storage.
template <std::size_t N>
Lattice<cplx, N> to_complex(const Lattice<double, N>& f) {
  Lattice<cplx, N> out(f.grid());
  for (std::size_t n = 0; n < f.data().size(); ++n) out.data()[n] = f.data()[n];
  return out;
}

}  // namespace xfl
