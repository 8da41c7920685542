#pragma once

#include <cmath>
#include <string>

namespace xfl {

namespace detail {

struct AxisStencil {
  std::size_t lo, hi;
  double w_lo, w_hi;
};

inline AxisStencil axis_stencil(const Grid3& grid, int axis, double coord, Deposition mode) {
  const auto n = grid.dim(axis);
  double u = (coord - grid.origin()[axis]) / grid.spacing();
  if (grid.boundary() == Boundary::periodic) {
    u = std::fmod(u, static_cast<double>(n));
    if (u < 0.0) u += static_cast<double>(n);
  }
  if (mode == Deposition::nearest_node) {
    auto i = static_cast<std::size_t>(std::llround(u));
    if (i >= n) i = grid.boundary() == Boundary::periodic ? i % n : n - 1;
    return {i, i, 1.0, 0.0};
  }
  auto lo = static_cast<std::size_t>(std::floor(u));
  if (grid.boundary() == Boundary::free_space && lo + 1 >= n) lo = n - 2;
  if (lo >= n) lo = n - 1;
  const double f = u - static_cast<double>(lo);
  const std::size_t hi = (lo + 1) % n;
  return {lo, hi, 1.0 - f, f};
}

}  // namespace detail

template <class Fn>
void for_each_deposition_node(const Grid3& grid, const Vec3& position, Deposition mode, Fn&& fn) {
  if (!grid.contains(position)) {
    throw OutOfBoundsError("position (" + std::to_string(position[0]) + ", " +
                           std::to_string(position[1]) + ", " + std::to_string(position[2]) +
                           ") lies outside the grid");
  }
  const auto sx = detail::axis_stencil(grid, 0, position[0], mode);
  const auto sy = detail::axis_stencil(grid, 1, position[1], mode);
  const auto sz = detail::axis_stencil(grid, 2, position[2], mode);
  const std::size_t xs[2] = {sx.lo, sx.hi};
  const std::size_t ys[2] = {sy.lo, sy.hi};
  const std::size_t zs[2] = {sz.lo, sz.hi};
  const double wx[2] = {sx.w_lo, sx.w_hi};
  const double wy[2] = {sy.w_lo, sy.w_hi};
  const double wz[2] = {sz.w_lo, sz.w_hi};
  for (int c = 0; c < 2; ++c) {
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a) {
        const double w = wx[a] * wy[b] * wz[c];
        if (w != 0.0) fn(grid.index(xs[a], ys[b], zs[c]), w);
      }
    }
  }
}

}  // namespace xfl
