#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xfl/charge.hpp"
#include "xfl/lattice.hpp"

namespace xfl {

/// Stability bound dt <= kCflFactorMax * h / sqrt(3) enforced on construction.
inline constexpr double kCflFactorMax = 0.9;

/// h / sqrt(3), the explicit 3D leapfrog stability limit.
double cfl_limit(const Grid3& grid);

/// A point source moving on x(t) = position + velocity * t, contributing
/// coupling[c] * delta(x - x(t)) to the right-hand side of component c.
template <class T, std::size_t N>
struct PointSource {
  Vec3 position{};
  Vec3 velocity{};
  std::array<T, N> coupling{};
};

/// Per-component source strengths of a charge for a given field shape:
///   scalar field  : electric -> e, scalar -> e dtau/dt
///   four-vector   : electric / vector -> e U^mu = e gamma (1, v)
///   spinor        : spinor -> Lambda_a e dtau/dt
/// Other combinations throw.
template <class T, std::size_t N>
PointSource<T, N> point_source(const ChargeSpec& charge);

/// The sourced Klein-Gordon operator shared by the stepper and the residual
/// checks: rhs(phi, t) = lap(phi) - m^2 phi + s(t).
///
/// Periodic grids wrap the compact 7-point Laplacian and add a uniform
/// neutralizing background to each source component (zero net source), the
/// convention the periodic Poisson solver uses. Free-space grids use Dirichlet
/// ghost nodes one cell outside each face, set to the instantaneous static far
/// field of the sources, sum_q coupling_q exp(-m r) / (4 pi r) (zero for
/// source-free runs).
template <class T, std::size_t N>
class WaveSystem {
 public:
  WaveSystem(Grid3 grid, double mass, std::vector<PointSource<T, N>> sources = {},
             std::string species = "none");

  /// Builds sources from a scenario (each charge through point_source).
  static WaveSystem from_scenario(const ChargeScenario& scenario, double mass);

  const Grid3& grid() const { return grid_; }
  double mass() const { return mass_; }
  const std::vector<PointSource<T, N>>& sources() const { return sources_; }
  bool has_sources() const { return !sources_.empty(); }
  /// Species label of the sources ("none" when source-free).
  const std::string& species() const { return species_; }

  /// Deposited source density at time t (cloud-in-cell, neutralized if periodic).
  Lattice<T, N> source_density(double t) const;

  /// out = rhs(field, t).
  void apply(const Lattice<T, N>& field, double t, Lattice<T, N>& out) const;
  Lattice<T, N> apply(const Lattice<T, N>& field, double t) const;

  /// Re <a, K b> h^3 with K = -lap + m^2 using source-free boundaries.
  double energy_form(const Lattice<T, N>& a, const Lattice<T, N>& b) const;

 private:
  Grid3 grid_;
  double mass_;
  std::vector<PointSource<T, N>> sources_;
  std::string species_;
};

/// Leapfrog state: the current field, the previous field, and the clock.
template <class T, std::size_t N>
class WaveState {
 public:
  /// Zero initial velocity (previous = current) unless `previous` is given.
  /// Throws GeometryError when |dt| exceeds 0.9 h / sqrt(3) or when the mass
  /// term makes the scheme unstable.
  WaveState(WaveSystem<T, N> system, Lattice<T, N> field, double dt,
            std::optional<Lattice<T, N>> previous = std::nullopt, double t = 0.0);

  const WaveSystem<T, N>& system() const { return system_; }
  const Lattice<T, N>& field() const { return field_; }
  const Lattice<T, N>& field_prev() const { return prev_; }
  double t() const { return t_; }
  double dt() const { return dt_; }
  double mass() const { return system_.mass(); }
  std::size_t steps_taken() const { return steps_; }

  /// One leapfrog update phi+ = 2 phi - phi- + dt^2 rhs(phi, t). With damping
  /// gamma > 0 the velocity is damped: (phi+ - 2 phi + phi-)/dt^2 +
  /// gamma (phi+ - phi-)/(2 dt) = rhs. Throws InstabilityError on non-finite values.
  void step(double damping = 0.0);

  /// Swaps current and previous fields (the clock moves back to the previous
  /// level) and flips the sign of dt, so further steps retrace the trajectory.
  /// Reversing, stepping N times, and reversing again undoes N forward steps.
  void reverse();

  /// max |phi - phi_prev| / |dt|.
  double max_velocity() const;

  /// Conserved leapfrog energy of the source-free scheme,
  /// 1/2 |(phi - phi_prev)/dt|^2 h^3 + 1/2 <phi, K phi_prev> h^3.
  double discrete_energy() const;

 private:
  WaveSystem<T, N> system_;
  Lattice<T, N> field_;
  Lattice<T, N> prev_;
  double dt_;
  double t_;
  std::size_t steps_ = 0;
  Lattice<T, N> scratch_;
};

using ScalarWave = WaveState<double, 1>;
using ComplexScalarWave = WaveState<cplx, 1>;
using VectorWave = WaveState<double, 4>;
using SpinorWave = WaveState<cplx, 4>;

/// One step of the scalar equation d_t^2 phi = lap phi - m^2 phi + e rho0.
ScalarWave step_scalar_wave(ScalarWave state);
/// One step of each Lorenz-gauge component d_t^2 B^mu = lap B^mu + e j^mu.
VectorWave step_vector_wave(VectorWave state);

struct RelaxationOptions {
  double tolerance = 1e-8;         // stop when max |d_t phi| falls below
  std::size_t max_steps = 200000;  // SamplingError if not converged
  double initial_damping_dt = 0.1; // gamma0 * dt
  double ramp = 0.995;             // geometric decay of gamma per step
};

/// Damped relaxation toward the static solution of the sourced equation.
/// Damping starts at 0.1 / dt and ramps geometrically down to the critical
/// value 2 sqrt(k_min^2 + m^2) of the slowest box mode. Returns the number of
/// steps taken.
template <class T, std::size_t N>
std::size_t relax_to_static(WaveState<T, N>& state, const RelaxationOptions& options = {});

/// Uniformly spaced snapshots of a field evolution.
template <class T, std::size_t N>
struct FieldHistory {
  std::vector<double> times;
  std::vector<Lattice<T, N>> snapshots;
  std::size_t stride = 1;
  double step_dt = 0.0;  // integrator step; snapshot spacing is stride * step_dt
  std::optional<WaveSystem<T, N>> system;
  std::string species = "none";

  std::size_t size() const { return snapshots.size(); }
  const Grid3& grid() const { return snapshots.front().grid(); }
  /// Snapshot spacing (times[1] - times[0]); 0 for fewer than two snapshots.
  double spacing() const { return times.size() < 2 ? 0.0 : times[1] - times[0]; }
  /// Throws FormatError for non-uniform spacing or mismatched grids.
  void require_uniform() const;
};

/// Steps `state` `steps` times, snapshotting every `stride` steps (the
/// initial state is always the first snapshot).
template <class T, std::size_t N>
FieldHistory<T, N> record_history(WaveState<T, N> initial, std::size_t steps, std::size_t stride);

/// Evolves the plane wave cos(k . x) with zero initial velocity on a periodic
/// grid and fits the oscillation frequency at the origin node from
/// interpolated zero crossings. k must be commensurate with the box; at
/// least four periods must be resolved (SamplingError otherwise).
double measure_dispersion(const Grid3& grid, const Vec3& k, double mass, std::size_t steps,
                          double dt_factor = 0.5);

/// History files: <stem>.xfl holds the snapshots as consecutive lattice
/// records; <stem>.json holds {dt, stride, steps, mass, species, t0, snapshots}.
template <class T, std::size_t N>
void save_history(const std::filesystem::path& stem, const FieldHistory<T, N>& history);
template <class T, std::size_t N>
FieldHistory<T, N> load_history(const std::filesystem::path& stem);

}  // namespace xfl
