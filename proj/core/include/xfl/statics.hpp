#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "xfl/charge.hpp"
#include "xfl/lattice.hpp"

namespace xfl {

/// Potential and electric field E = -grad(potential) of one static solve.
struct StaticField {
  ScalarLattice potential;
  Vector3Lattice field;

  StaticField& operator+=(const StaticField& o) {
    potential += o.potential;
    field += o.field;
    return *this;
  }
  friend StaticField operator+(StaticField a, const StaticField& b) { return a += b; }
};

/// Integral of 1/|x| over the unit cube centered at the origin, evaluated
/// once by adaptive quadrature (~2.3800772). Used as the r = 0 value of the
/// lattice Coulomb kernel: G(0) = c / (4 pi eps0 h).
double unit_cell_inverse_distance();

/// e r / (4 pi eps0 |r|^3). Throws SingularityError at r = 0.
Vec3 coulomb_field_analytic(double charge, double epsilon0, const Vec3& r);

/// q E.
Vec3 force_on_charge(double q, const Vec3& field);

enum class FreeSpaceMethod {
  automatic,  // direct summation for sparse sources, transform otherwise
  transform,  // zero-padded doubled-grid FFT convolution
  direct,     // explicit sum over nonzero source sites
};

/// Solves laplacian(phi) = -rho / eps0.
///
/// Free space: phi = G * rho with G the sampled 1/(4 pi eps0 r) kernel.
/// Periodic: the mean of rho is removed and the compact 7-point Laplacian is
/// inverted exactly in Fourier space; an all-zero rho gives phi = 0.
ScalarLattice solve_poisson(const ScalarLattice& rho, double epsilon0,
                            FreeSpaceMethod method = FreeSpaceMethod::automatic);

/// E = -gradient(potential).
Vector3Lattice electric_field(const ScalarLattice& potential);

StaticField solve_static(const ScalarLattice& rho, double epsilon0,
                         FreeSpaceMethod method = FreeSpaceMethod::automatic);

/// Field of one point charge deposited with cloud-in-cell.
StaticField solve_charge(const Grid3& grid, const ChargeSpec& charge, double epsilon0,
                         FreeSpaceMethod method = FreeSpaceMethod::automatic);

// Energies. The Vector3Lattice overloads are plain midpoint sums of a
// node-centered field over the grid box.
//
// The StaticField overloads integrate over all space and work from the
// potentials: inside the box the field is taken on the staggered links,
// E = -(phi[i + e_a] - phi[i]) / h, whose adjoint is the compact Laplacian the
// solvers share (a 4x smaller truncation constant than the node-centered
// gradient). Free-space grids integrate over the box spanned by the outer
// nodes and add the exterior contribution from Green's identity,
// eps0 * surface_integral(phi_A E_B . n), since both fields are harmonic
// outside the box and vanish at infinity.

/// (eps0 / 2) * integrate(|E|^2) over the box.
double field_energy(const Vector3Lattice& field, double epsilon0);
double field_energy(const StaticField& f, double epsilon0);

/// eps0 * integrate(E_A . E_B) over the box.
double interaction_energy(const Vector3Lattice& a, const Vector3Lattice& b, double epsilon0);
double interaction_energy(const StaticField& a, const StaticField& b, double epsilon0);

/// Symmetrized exterior term (eps0 / 2) * [S(phi_A, E_B) + S(phi_B, E_A)] with
/// S(phi, E) the surface integral of phi E.n over the faces through the outer
/// nodes. Zero for periodic grids.
double exterior_interaction(const StaticField& a, const StaticField& b, double epsilon0);

/// Lattice-regularized self-energy C of a single charge (all-space energy).
double self_energy(const ChargeSpec& charge, const Grid3& grid, double epsilon0);

struct EnergyReport {
  double total_W = 0.0;
  std::vector<double> self_terms;
  double interaction_term = 0.0;
  double grid_spacing = 1.0;
  Index3 dims{};
  Boundary boundary = Boundary::free_space;
  double epsilon0 = 1.0;

  nlohmann::json to_json() const;
};

/// Per-charge self terms, pairwise interaction, and total field energy.
EnergyReport energy_report(const ChargeScenario& scenario);

enum class EnergyFunctional {
  interaction,  // position-dependent cross terms only
  total,        // full field energy including self terms
};

/// dW/dx_axis of the chosen charge by central difference with step dR.
/// Requires a free-space grid and dR in [h/4, 2h].
double energy_derivative(const ChargeScenario& scenario, std::size_t which, int axis, double dR,
                         EnergyFunctional functional = EnergyFunctional::interaction);

/// F = -grad W_int for the chosen charge (default dR = h/2 when dR <= 0).
Vec3 force_from_energy_gradient(const ChargeScenario& scenario, std::size_t which,
                                double dR = 0.0);

/// Same, differentiating the total field energy instead of the cross term.
Vec3 force_from_total_energy_gradient(const ChargeScenario& scenario, std::size_t which,
                                      double dR = 0.0);

}  // namespace xfl
