#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

namespace xfl {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<std::size_t, 3>;

enum class Boundary { periodic, free_space };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Smallest extent per axis accepted by solvers and stencils.
inline constexpr std::size_t kMinSolverCells = 8;

/// Uniform 3D lattice. Node (i, j, k) sits at origin + (i, j, k) * spacing and
/// sites are stored x-fastest: index = i + nx * (j + ny * k).
class Grid3 {
 public:
  Grid3(Index3 dims, double spacing, Vec3 origin = {0.0, 0.0, 0.0},
        Boundary boundary = Boundary::periodic);

  /// Cubic n^3 grid.
  static Grid3 cube(std::size_t n, double spacing, Boundary boundary,
                    Vec3 origin = {0.0, 0.0, 0.0});

  const Index3& dims() const { return dims_; }
  std::size_t dim(int axis) const { return dims_[axis]; }
  double spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  Boundary boundary() const { return boundary_; }
  std::size_t sites() const { return dims_[0] * dims_[1] * dims_[2]; }
  double cell_volume() const { return spacing_ * spacing_ * spacing_; }

  /// n_i * h along each axis.
  Vec3 extent() const;
  /// Geometric center of the node range.
  Vec3 center() const;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims_[0] * (j + dims_[1] * k);
  }
  Index3 unravel(std::size_t site) const {
    return {site % dims_[0], (site / dims_[0]) % dims_[1], site / (dims_[0] * dims_[1])};
  }
  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin_[0] + static_cast<double>(i) * spacing_,
            origin_[1] + static_cast<double>(j) * spacing_,
            origin_[2] + static_cast<double>(k) * spacing_};
  }
  Vec3 position(std::size_t site) const {
    const auto ijk = unravel(site);
    return position(ijk[0], ijk[1], ijk[2]);
  }

  /// Periodic: [origin, origin + n h). Free space: [first node, last node].
  bool contains(const Vec3& p) const;

  /// Throws GeometryError when any axis has fewer than kMinSolverCells nodes.
  void require_solver_size() const;

  bool operator==(const Grid3& other) const = default;

 private:
  Index3 dims_;
  double spacing_;
  Vec3 origin_;
  Boundary boundary_;
};

/// Throws GridMismatchError unless both grids are identical.
void require_same_grid(const Grid3& a, const Grid3& b, std::string_view what);

}  // namespace xfl
