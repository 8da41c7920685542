#include "xfl/charge.hpp"

#include <cmath>
#include <string>

#include "xfl/spinor.hpp"

namespace xfl {

std::string_view to_string(Species s) {
  switch (s) {
    case Species::electric: return "electric";
    case Species::vector: return "vector";
    case Species::scalar: return "scalar";
    case Species::spinor: return "spinor";
  }
  return "electric";
}

Species species_from_string(std::string_view s) {
  if (s == "electric") return Species::electric;
  if (s == "vector") return Species::vector;
  if (s == "scalar") return Species::scalar;
  if (s == "spinor") return Species::spinor;
  throw Error("unknown charge species '" + std::string(s) + "'");
}

double lorentz_density_factor(const Vec3& velocity) {
  const double v2 = dot(velocity, velocity);
  if (!(v2 < 1.0)) {
    throw SuperluminalError("charge speed |v| = " + std::to_string(std::sqrt(v2)) +
                            " is not below c = 1");
  }
  return std::sqrt(1.0 - v2);
}

void ChargeSpec::validate() const {
  if (!std::isfinite(value)) throw Error("charge value must be finite");
  lorentz_density_factor(velocity);
  if (species == Species::spinor) {
    if (!lambda) throw NormalizationError("spinor charge requires a lambda spinor");
    const double n = dirac_norm(*lambda);
    if (std::abs(n - 1.0) > kLambdaNormTolerance) {
      throw NormalizationError("lambda spinor is not normalized: bar(L) L = " + std::to_string(n));
    }
  }
}

void ChargeScenario::validate() const {
  if (charges.empty()) throw Error("scenario needs at least one charge");
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) throw Error("epsilon0 must be positive");
  for (std::size_t n = 0; n < charges.size(); ++n) {
    charges[n].validate();
    if (!grid.contains(charges[n].position)) {
      throw OutOfBoundsError("charge " + std::to_string(n) + " lies outside the grid");
    }
  }
}

void deposit_point(ScalarLattice& rho, const Vec3& position, double amount, Deposition mode) {
  const auto& grid = rho.grid();
  const double density = amount / grid.cell_volume();
  auto values = rho.component(0);
  for_each_deposition_node(grid, position, mode,
                           [&](std::size_t site, double w) { values[site] += density * w; });
}

ScalarLattice deposit_charge(const Grid3& grid, const ChargeSpec& charge, Deposition mode) {
  grid.require_solver_size();
  ScalarLattice rho(grid);
  deposit_point(rho, charge.position, charge.value, mode);
  return rho;
}

}  // namespace xfl
