#pragma once

#include <span>

#include "xfl/lattice.hpp"

namespace xfl {

// Second-order finite differences on a Grid3. Periodic grids wrap indices;
// free-space grids switch to one-sided second-order stencils on the faces.

namespace detail {

struct AxisWalk {
  std::size_t n;       // nodes along the axis
  std::size_t stride;  // site-index step along the axis
};

inline AxisWalk axis_walk(const Grid3& g, int axis) {
  const auto& d = g.dims();
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d[0] : d[0] * d[1]);
  return {d[axis], stride};
}

inline std::size_t axis_coord(const Grid3& g, std::size_t site, int axis) {
  return g.unravel(site)[axis];
}

}  // namespace detail

/// d/dx_axis with central differences (one-sided at free-space faces).
template <class T>
void central_difference(const Grid3& g, int axis, std::span<const T> in, std::span<T> out) {
  const auto [n, s] = detail::axis_walk(g, axis);
  const double inv2h = 0.5 / g.spacing();
  const bool periodic = g.boundary() == Boundary::periodic;
  for (std::size_t site = 0; site < g.sites(); ++site) {
    const std::size_t c = detail::axis_coord(g, site, axis);
    const std::size_t base = site - c * s;
    if (c > 0 && c + 1 < n) {
      out[site] = (in[site + s] - in[site - s]) * inv2h;
    } else if (periodic) {
      const std::size_t up = base + ((c + 1) % n) * s;
      const std::size_t dn = base + ((c + n - 1) % n) * s;
      out[site] = (in[up] - in[dn]) * inv2h;
    } else if (c == 0) {
      out[site] = (-3.0 * in[site] + 4.0 * in[site + s] - in[site + 2 * s]) * inv2h;
    } else {
      out[site] = (3.0 * in[site] - 4.0 * in[site - s] + in[site - 2 * s]) * inv2h;
    }
  }
}

/// Forward difference (f[i+1] - f[i]) / h, a second-order estimate of the
/// derivative at the half-node i + 1/2. Free-space grids reuse the last
/// interior difference on the upper face.
template <class T>
void forward_difference(const Grid3& g, int axis, std::span<const T> in, std::span<T> out) {
  const auto [n, s] = detail::axis_walk(g, axis);
  const double invh = 1.0 / g.spacing();
  const bool periodic = g.boundary() == Boundary::periodic;
  for (std::size_t site = 0; site < g.sites(); ++site) {
    const std::size_t c = detail::axis_coord(g, site, axis);
    if (c + 1 < n) {
      out[site] = (in[site + s] - in[site]) * invh;
    } else if (periodic) {
      out[site] = (in[site - c * s] - in[site]) * invh;
    } else {
      out[site] = (in[site] - in[site - s]) * invh;
    }
  }
}

/// Backward difference (f[i] - f[i-1]) / h; adjoint partner of forward_difference
/// on periodic grids, so backward(forward(f)) is the compact 3-point stencil.
template <class T>
void backward_difference(const Grid3& g, int axis, std::span<const T> in, std::span<T> out) {
  const auto [n, s] = detail::axis_walk(g, axis);
  const double invh = 1.0 / g.spacing();
  const bool periodic = g.boundary() == Boundary::periodic;
  for (std::size_t site = 0; site < g.sites(); ++site) {
    const std::size_t c = detail::axis_coord(g, site, axis);
    if (c > 0) {
      out[site] = (in[site] - in[site - s]) * invh;
    } else if (periodic) {
      out[site] = (in[site] - in[site + (n - 1) * s]) * invh;
    } else {
      out[site] = (in[site + s] - in[site]) * invh;
    }
  }
}

/// Adds d^2/dx_axis^2 of `in` to `out` (compact 3-point stencil; one-sided
/// 4-point second-order stencil at free-space faces).
template <class T>
void accumulate_second_difference(const Grid3& g, int axis, std::span<const T> in,
                                  std::span<T> out) {
  const auto [n, s] = detail::axis_walk(g, axis);
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  const bool periodic = g.boundary() == Boundary::periodic;
  for (std::size_t site = 0; site < g.sites(); ++site) {
    const std::size_t c = detail::axis_coord(g, site, axis);
    const std::size_t base = site - c * s;
    if (c > 0 && c + 1 < n) {
      out[site] += (in[site + s] - 2.0 * in[site] + in[site - s]) * invh2;
    } else if (periodic) {
      const std::size_t up = base + ((c + 1) % n) * s;
      const std::size_t dn = base + ((c + n - 1) % n) * s;
      out[site] += (in[up] - 2.0 * in[site] + in[dn]) * invh2;
    } else if (c == 0) {
      out[site] += (2.0 * in[site] - 5.0 * in[site + s] + 4.0 * in[site + 2 * s] -
                    in[site + 3 * s]) * invh2;
    } else {
      out[site] += (2.0 * in[site] - 5.0 * in[site - s] + 4.0 * in[site - 2 * s] -
                    in[site - 3 * s]) * invh2;
    }
  }
}

template <class T>
Lattice<T, 3> gradient(const Lattice<T, 1>& f) {
  f.grid().require_solver_size();
  Lattice<T, 3> out(f.grid());
  for (int a = 0; a < 3; ++a) central_difference<T>(f.grid(), a, f.component(0), out.component(a));
  return out;
}

template <class T>
Lattice<T, 1> laplacian(const Lattice<T, 1>& f) {
  f.grid().require_solver_size();
  Lattice<T, 1> out(f.grid());
  for (int a = 0; a < 3; ++a) {
    accumulate_second_difference<T>(f.grid(), a, f.component(0), out.component(0));
  }
  return out;
}

/// Midpoint rule: sum(f) * h^3. Summation order is fixed (site order).
template <class T>
T integrate(const Grid3& g, std::span<const T> f) {
  T sum{};
  for (const auto& v : f) sum += v;
  return sum * g.cell_volume();
}

template <class T>
T integrate(const Lattice<T, 1>& f) {
  return integrate<T>(f.grid(), f.component(0));
}

/// Pointwise dot product of two 3-vector lattices.
ScalarLattice dot(const Vector3Lattice& a, const Vector3Lattice& b);

}  // namespace xfl
