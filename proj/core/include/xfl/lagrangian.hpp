#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "xfl/dynamics.hpp"
#include "xfl/spectral.hpp"

namespace xfl {

// Index conventions: metric (+,-,-,-); four-vector lattices store the
// contravariant components A^mu = (A^0, A^1, A^2, A^3). Lowered components are
// A_0 = A^0, A_i = -A^i, and d_mu = (d_t, d_x, d_y, d_z). With these,
// F_{0i} = d_t A_i - d_i A_0 = +E_i and the raised F^{0i} = -E_i.

/// Minkowski metric diagonal.
inline constexpr std::array<double, 4> kMetric = {1.0, -1.0, -1.0, -1.0};

/// Antisymmetric F_{mu nu} (lower indices) at one time slice. Only the six
/// entries with mu < nu are stored; the rest follow by antisymmetry.
template <class T>
class FieldStrength {
 public:
  explicit FieldStrength(Grid3 grid) : data_(std::move(grid)) {}

  const Grid3& grid() const { return data_.grid(); }
  /// F_{mu nu} at a site.
  T lower(int mu, int nu, std::size_t site) const;
  /// F^{mu nu} = eta^{mu mu} eta^{nu nu} F_{mu nu}.
  T upper(int mu, int nu, std::size_t site) const;
  /// Storage of the mu < nu entry (pairs ordered 01 02 03 12 13 23).
  std::span<T> pair(int mu, int nu);
  std::span<const T> pair(int mu, int nu) const;
  const Lattice<T, 6>& data() const { return data_; }

 private:
  static std::size_t slot(int mu, int nu);
  Lattice<T, 6> data_;
};

/// Four-gradient d_mu phi (lower index) of a scalar history at one slice.
template <class T>
using FourGradient = Lattice<T, 4>;

/// F_{mu nu} of a four-vector history at snapshot `slice` (centered time
/// difference, central spatial differences). Needs 1 <= slice <= size - 2;
/// SamplingError for histories with fewer than 3 snapshots.
template <class T>
FieldStrength<T> field_strength(const FieldHistory<T, 4>& history, std::size_t slice);

/// d_mu phi with the same stencils.
template <class T>
FourGradient<T> four_gradient(const FieldHistory<T, 1>& history, std::size_t slice);

/// F_{mu nu} F^{mu nu} per site (bilinear, no complex conjugation).
template <class T>
Lattice<T, 1> contract(const FieldStrength<T>& a, const FieldStrength<T>& b);
/// d_mu a d^mu b per site (bilinear).
template <class T>
Lattice<T, 1> contract(const FourGradient<T>& a, const FourGradient<T>& b);

/// Named integrals of one Lagrangian evaluation. Terms are complex because
/// split-sector fields are complex; `complex_valued` flags any term with a
/// non-negligible imaginary part. Sector A is the evaluated (difference) field,
/// sector B the sum field when one is supplied.
struct LagrangianReport {
  static constexpr std::array<std::string_view, 5> kTermNames = {
      "kinetic_A", "kinetic_B", "source_coupling", "mass_term", "coupling_fV"};

  std::string density;  // "maxwell", "scalar", "dirac", ...
  std::array<cplx, 5> terms{};
  cplx total{};
  bool complex_valued = false;
  double time = 0.0;
  double dt = 0.0;
  double spacing = 1.0;
  Index3 dims{};
  Boundary boundary = Boundary::periodic;

  cplx term(std::string_view name) const;
  cplx& term(std::string_view name);
  /// Sets total to the sum of the terms and updates the complex flag.
  void finalize();

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// -1/4 F^{mu nu} F_{mu nu} and -e j^mu A_mu integrated at `slice`. The
/// coupling samples A at each charge with the cloud-in-cell weights used for
/// deposition, with j^mu = e U^mu delta(x - x(t)).
template <class T>
LagrangianReport maxwell_density(const FieldHistory<T, 4>& history, std::size_t slice,
                                 const std::optional<ChargeScenario>& source = std::nullopt);

/// Scalar sector: kinetic_A = 1/2 d_mu phi d^mu phi, mass_term = +1/2 m^2 phi^2
/// (the sign written in the massive scalar Lagrangian this follows),
/// source_coupling = + e rho0 phi with the dtau/dt weight of scalar charges.
template <class T>
LagrangianReport scalar_density(const FieldHistory<T, 1>& history, std::size_t slice, double mass,
                                const std::optional<ChargeScenario>& source = std::nullopt);

/// Both sectors of a split side by side: kinetic_A from A = B+ - B-,
/// kinetic_B from A_b = B+ + B- (Maxwell form for four-vectors, scalar form
/// otherwise). Neither is asserted to vanish.
template <std::size_t N>
LagrangianReport split_density(const FrequencySplit<N>& split, std::size_t slice, double mass = 0.0);

/// Worst relative violation over all interior slices and sites of
///   F_A + F_Ab = 2 F_+,  F_Ab - F_A = 2 F_-,
///   F_A.F_A + F_Ab.F_Ab = 2 (F_+.F_+ + F_-.F_-)
/// (four-gradients in place of F for scalar splits). Violations are measured
/// against the largest magnitude appearing in each identity.
template <std::size_t N>
double kinetic_split_check(const FrequencySplit<N>& split);

/// max |(phi+ - 2 phi + phi-)/dt^2 - lap phi + m^2 phi - s| over interior
/// snapshots using the stepper's own operator. `system` defaults to the one
/// recorded in the history, else a source-free system of the given mass.
/// Throws UnsupportedError for stride != 1 and SamplingError below 3 snapshots.
template <class T, std::size_t N>
double euler_lagrange_residual(const FieldHistory<T, N>& history, double mass = 0.0,
                               const std::optional<WaveSystem<T, N>>& system = std::nullopt);

/// Minimal bilinear current coupling at `slice`: -e j^mu A_mu for a
/// four-vector field, + e rho0 phi for a scalar field. Complex for complex
/// fields (a difference field of a real history is imaginary).
template <std::size_t N>
cplx coupling_term(const ComplexHistory<N>& field, std::size_t slice, const ChargeScenario& current);

}  // namespace xfl
