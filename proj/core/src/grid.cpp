#include "xfl/grid.hpp"

#include "xfl/error.hpp"

namespace xfl {

std::string_view to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "free-space";
}

Boundary boundary_from_string(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "free-space" || s == "free_space" || s == "free") return Boundary::free_space;
  throw GeometryError("unknown boundary mode '" + std::string(s) + "'");
}

Grid3::Grid3(Index3 dims, double spacing, Vec3 origin, Boundary boundary)
    : dims_(dims), spacing_(spacing), origin_(origin), boundary_(boundary) {
  for (auto n : dims_) {
    if (n == 0) throw GeometryError("grid dimensions must be positive");
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw GeometryError("grid spacing must be positive and finite");
  }
  for (auto o : origin_) {
    if (!std::isfinite(o)) throw GeometryError("grid origin must be finite");
  }
}

Grid3 Grid3::cube(std::size_t n, double spacing, Boundary boundary, Vec3 origin) {
  return Grid3({n, n, n}, spacing, origin, boundary);
}

Vec3 Grid3::extent() const {
  return {static_cast<double>(dims_[0]) * spacing_, static_cast<double>(dims_[1]) * spacing_,
          static_cast<double>(dims_[2]) * spacing_};
}

Vec3 Grid3::center() const {
  Vec3 c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = origin_[a] + 0.5 * static_cast<double>(dims_[a] - 1) * spacing_;
  }
  return c;
}

bool Grid3::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(p[a])) return false;
    const double lo = origin_[a];
    if (boundary_ == Boundary::periodic) {
      const double hi = lo + static_cast<double>(dims_[a]) * spacing_;
      if (p[a] < lo || p[a] >= hi) return false;
    } else {
      const double hi = lo + static_cast<double>(dims_[a] - 1) * spacing_;
      if (p[a] < lo || p[a] > hi) return false;
    }
  }
  return true;
}

void Grid3::require_solver_size() const {
  for (auto n : dims_) {
    if (n < kMinSolverCells) {
      throw GeometryError("grid needs at least " + std::to_string(kMinSolverCells) +
                          " nodes per axis, got " + std::to_string(n));
    }
  }
}

void require_same_grid(const Grid3& a, const Grid3& b, std::string_view what) {
  if (!(a == b)) throw GridMismatchError(std::string(what) + ": lattices live on different grids");
}

}  // namespace xfl
