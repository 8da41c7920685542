#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "xfl/grid.hpp"
#include "xfl/lattice.hpp"

namespace xfl {

/// What kind of field a point charge excites.
enum class Species { electric, vector, scalar, spinor };

std::string_view to_string(Species s);
Species species_from_string(std::string_view s);

using Spinor4 = std::array<cplx, 4>;

struct ChargeSpec {
  double value = 1.0;
  Vec3 position{};
  Vec3 velocity{};
  Species species = Species::electric;
  /// Required iff species == spinor; must satisfy bar(L) L = 1.
  std::optional<Spinor4> lambda;

  /// Position at time t along the uniform trajectory x(t) = x0 + v t.
  Vec3 position_at(double t) const { return position + t * velocity; }

  /// Throws on |v| >= 1 or a missing / unnormalized spinor.
  void validate() const;
};

struct ChargeScenario {
  std::vector<ChargeSpec> charges;
  double epsilon0 = 1.0;
  Grid3 grid;

  /// At least one charge, every charge valid and inside the grid, epsilon0 > 0.
  void validate() const;
};

enum class Deposition { cloud_in_cell, nearest_node };

/// dtau/dt = sqrt(1 - |v|^2). Throws SuperluminalError for |v| >= 1.
double lorentz_density_factor(const Vec3& velocity);

/// Deposit `amount` at `position` as a density: sum(rho) * h^3 == amount.
/// Accumulates into `rho`.
void deposit_point(ScalarLattice& rho, const Vec3& position, double amount,
                   Deposition mode = Deposition::cloud_in_cell);

/// Density of a single point charge (charge.value, no Lorentz weighting).
ScalarLattice deposit_charge(const Grid3& grid, const ChargeSpec& charge,
                             Deposition mode = Deposition::cloud_in_cell);

/// Visits the (site, weight) pairs a deposition touches; weights sum to 1.
template <class Fn>
void for_each_deposition_node(const Grid3& grid, const Vec3& position, Deposition mode, Fn&& fn);

}  // namespace xfl

#include "xfl/detail/deposition_impl.hpp"
