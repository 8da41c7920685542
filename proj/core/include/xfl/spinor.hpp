#pragma once

#include <array>

#include "xfl/charge.hpp"
#include "xfl/dynamics.hpp"
#include "xfl/lagrangian.hpp"

namespace xfl {

using Matrix4 = std::array<std::array<cplx, 4>, 4>;

/// bar(L) L must equal 1 to this tolerance.
inline constexpr double kLambdaNormTolerance = 1e-12;

/// u^dagger gamma^0 u in the Dirac representation (real by construction).
double dirac_norm(const Spinor4& u);

/// Gamma matrices in the Dirac representation:
/// gamma^0 = diag(1, 1, -1, -1), gamma^i = [[0, sigma^i], [-sigma^i, 0]].
struct GammaSet {
  std::array<Matrix4, 4> gamma{};

  static const GammaSet& dirac();

  /// gamma^mu psi.
  Spinor4 apply(int mu, const Spinor4& psi) const;
  /// bar(a) gamma^mu b = a^dagger gamma^0 gamma^mu b.
  cplx bilinear(const Spinor4& a, int mu, const Spinor4& b) const;
  /// bar(a) b.
  cplx scalar_bilinear(const Spinor4& a, const Spinor4& b) const;
  /// Largest entry of {gamma^mu, gamma^nu} - 2 eta^{mu nu} I over all pairs.
  double clifford_residual() const;
  /// Largest entry of (gamma^0)^dagger - gamma^0 and (gamma^i)^dagger + gamma^i.
  double hermiticity_residual() const;
};

/// u / sqrt(bar(u) u). Throws NormalizationError when bar(u) u is not
/// positive (the gamma^0 form is indefinite) or below 1e-12.
Spinor4 normalize_lambda(const Spinor4& u);

/// Leapfrog state for the spinor excited field: each component obeys the
/// scalar wave equation sourced by Lambda_a e dtau/dt rho0.
SpinorWave make_spinor_wave(const ChargeSpec& charge, const Grid3& grid, double mass = 0.0,
                            double dt_factor = 0.5);

/// Evolves from a zero field for `steps` steps.
FieldHistory<cplx, 4> solve_spinor_wave(const ChargeSpec& charge, const Grid3& grid, std::size_t steps,
                                        std::size_t stride = 1, double mass = 0.0,
                                        double dt_factor = 0.5);

/// Damped relaxation of the spinor field to its static profile.
SpinorLattice relax_spinor_wave(const ChargeSpec& charge, const Grid3& grid,
                                const RelaxationOptions& options = {}, double mass = 0.0,
                                double dt_factor = 0.9);

/// g_mu of each time level n in [0, size - 2]: forward differences
/// g_0 = (psi^{n+1} - psi^n)/dt and g_i = (psi^n(x + e_i) - psi^n(x))/h, so
/// that the backward divergence d^mu g_mu is the stepper's wave operator.
struct GField {
  std::array<FieldHistory<cplx, 4>, 4> g;
  std::size_t levels() const { return g[0].size(); }
};

/// Throws SamplingError below 3 snapshots.
GField g_from_psi(const FieldHistory<cplx, 4>& psi);

/// d^mu g_mu at level n in [1, levels - 1] (backward differences).
SpinorLattice g_divergence(const GField& g, std::size_t level);

/// max |d^mu g_mu + m^2 psi - s| / max |d^mu g_mu| over levels 1..levels-1,
/// with s the deposited source of `system`. Free-space grids skip the face
/// nodes, where the stepper reads boundary ghosts instead of neighbours.
double g_divergence_residual(const FieldHistory<cplx, 4>& psi, const GField& g,
                             const WaveSystem<cplx, 4>& system);

/// Pointwise first-order Dirac-form density at level n:
///   kinetic  = -bar(psi) gamma^mu (1/i) d_mu psi + h.c.
///   coupling = +bar(psi) gamma^mu (1/i) g_mu + h.c.
/// d_mu uses the same forward differences as g_from_psi, and bar(psi) is
/// averaged over the two nodes of each difference, so the two terms cancel
/// identically when g = g_from_psi(psi).
struct DiracDensity {
  ScalarLattice kinetic;
  ScalarLattice coupling;
  ScalarLattice total;
  double scale = 0.0;  // max over sites of sum_mu |bar(psi) gamma^mu d_mu psi|
  LagrangianReport report;
};

DiracDensity dirac_density(const FieldHistory<cplx, 4>& psi, const GField& g, std::size_t level,
                           const GammaSet& gammas = GammaSet::dirac());

/// -m * integral of bar(psi) psi at `slice`.
double mass_term_density(const FieldHistory<cplx, 4>& psi, std::size_t slice, double mass);

}  // namespace xfl
