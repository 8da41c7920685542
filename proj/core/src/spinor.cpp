#include "xfl/spinor.hpp"

#include <algorithm>
#include <cmath>

#include "xfl/calculus.hpp"

namespace xfl {

double dirac_norm(const Spinor4& u) {
  return std::norm(u[0]) + std::norm(u[1]) - std::norm(u[2]) - std::norm(u[3]);
}

namespace {

const cplx kI{0.0, 1.0};

GammaSet build_dirac() {
  GammaSet s;
  s.gamma[0][0][0] = 1.0;
  s.gamma[0][1][1] = 1.0;
  s.gamma[0][2][2] = -1.0;
  s.gamma[0][3][3] = -1.0;
  // Pauli matrices, row-major.
  std::array<std::array<std::array<cplx, 2>, 2>, 3> sigma{};
  sigma[0][0][1] = 1.0;
  sigma[0][1][0] = 1.0;
  sigma[1][0][1] = -kI;
  sigma[1][1][0] = kI;
  sigma[2][0][0] = 1.0;
  sigma[2][1][1] = -1.0;
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        s.gamma[i + 1][r][c + 2] = sigma[i][r][c];
        s.gamma[i + 1][r + 2][c] = -sigma[i][r][c];
      }
    }
  }
  return s;
}

Matrix4 multiply(const Matrix4& a, const Matrix4& b) {
  Matrix4 m{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int k = 0; k < 4; ++k) m[r][c] += a[r][k] * b[k][c];
    }
  }
  return m;
}

Spinor4 spinor_at(const Lattice<cplx, 4>& f, std::size_t site) {
  return {f(0, site), f(1, site), f(2, site), f(3, site)};
}

}  // namespace

const GammaSet& GammaSet::dirac() {
  static const GammaSet set = build_dirac();
  return set;
}

Spinor4 GammaSet::apply(int mu, const Spinor4& psi) const {
  Spinor4 out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out[r] += gamma[mu][r][c] * psi[c];
  }
  return out;
}

cplx GammaSet::scalar_bilinear(const Spinor4& a, const Spinor4& b) const {
  const Spinor4 g0b = apply(0, b);
  cplx acc{};
  for (int r = 0; r < 4; ++r) acc += std::conj(a[r]) * g0b[r];
  return acc;
}

cplx GammaSet::bilinear(const Spinor4& a, int mu, const Spinor4& b) const {
  return scalar_bilinear(a, apply(mu, b));
}

double GammaSet::clifford_residual() const {
  double worst = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      const Matrix4 ab = multiply(gamma[mu], gamma[nu]);
      const Matrix4 ba = multiply(gamma[nu], gamma[mu]);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const double expect = (r == c && mu == nu) ? 2.0 * kMetric[mu] : 0.0;
          worst = std::max(worst, std::abs(ab[r][c] + ba[r][c] - expect));
        }
      }
    }
  }
  return worst;
}

double GammaSet::hermiticity_residual() const {
  double worst = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    const double sign = mu == 0 ? 1.0 : -1.0;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        worst = std::max(worst, std::abs(std::conj(gamma[mu][c][r]) - sign * gamma[mu][r][c]));
      }
    }
  }
  return worst;
}

Spinor4 normalize_lambda(const Spinor4& u) {
  const double n = dirac_norm(u);
  if (!(n > 1e-12)) {
    throw NormalizationError("spinor cannot be normalized: bar(u) u = " + std::to_string(n) +
                             " is not positive");
  }
  const double s = 1.0 / std::sqrt(n);
  return {u[0] * s, u[1] * s, u[2] * s, u[3] * s};
}

SpinorWave make_spinor_wave(const ChargeSpec& charge, const Grid3& grid, double mass, double dt_factor) {
  if (charge.species != Species::spinor) throw UnsupportedError("spinor wave needs a spinor charge");
  WaveSystem<cplx, 4> system(grid, mass, {point_source<cplx, 4>(charge)}, "spinor");
  return SpinorWave(std::move(system), SpinorLattice(grid), dt_factor * cfl_limit(grid));
}

FieldHistory<cplx, 4> solve_spinor_wave(const ChargeSpec& charge, const Grid3& grid, std::size_t steps,
                                        std::size_t stride, double mass, double dt_factor) {
  return record_history(make_spinor_wave(charge, grid, mass, dt_factor), steps, stride);
}

SpinorLattice relax_spinor_wave(const ChargeSpec& charge, const Grid3& grid,
                                const RelaxationOptions& options, double mass, double dt_factor) {
  auto state = make_spinor_wave(charge, grid, mass, dt_factor);
  relax_to_static(state, options);
  return state.field();
}

GField g_from_psi(const FieldHistory<cplx, 4>& psi) {
  if (psi.size() < 3) {
    throw SamplingError("g_from_psi needs at least 3 snapshots, got " + std::to_string(psi.size()));
  }
  psi.require_uniform();
  const Grid3& grid = psi.grid();
  const double inv_dt = 1.0 / psi.spacing();
  GField out;
  for (auto& g : out.g) {
    g.stride = psi.stride;
    g.step_dt = psi.step_dt;
    g.species = psi.species;
    g.times.assign(psi.times.begin(), psi.times.end() - 1);
    g.snapshots.assign(psi.size() - 1, SpinorLattice(grid));
  }
  for (std::size_t n = 0; n + 1 < psi.size(); ++n) {
    const auto& now = psi.snapshots[n];
    const auto& next = psi.snapshots[n + 1];
    auto& g0 = out.g[0].snapshots[n];
    for (std::size_t k = 0; k < g0.data().size(); ++k) {
      g0.data()[k] = (next.data()[k] - now.data()[k]) * inv_dt;
    }
    for (int a = 0; a < 3; ++a) {
      auto& gi = out.g[a + 1].snapshots[n];
      for (std::size_t c = 0; c < 4; ++c) forward_difference<cplx>(grid, a, now.component(c), gi.component(c));
    }
  }
  return out;
}

SpinorLattice g_divergence(const GField& g, std::size_t level) {
  if (level < 1 || level >= g.levels()) throw Error("divergence level out of range");
  const Grid3& grid = g.g[0].grid();
  const double inv_dt = 1.0 / g.g[0].spacing();
  SpinorLattice out(grid);
  const auto& a = g.g[0].snapshots[level];
  const auto& b = g.g[0].snapshots[level - 1];
  for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = (a.data()[k] - b.data()[k]) * inv_dt;
  std::vector<cplx> tmp(grid.sites());
  for (int i = 0; i < 3; ++i) {
    const auto& gi = g.g[i + 1].snapshots[level];
    for (std::size_t c = 0; c < 4; ++c) {
      backward_difference<cplx>(grid, i, gi.component(c), tmp);
      auto o = out.component(c);
      for (std::size_t s = 0; s < tmp.size(); ++s) o[s] -= tmp[s];
    }
  }
  return out;
}

double g_divergence_residual(const FieldHistory<cplx, 4>& psi, const GField& g,
                             const WaveSystem<cplx, 4>& system) {
  const Grid3& grid = psi.grid();
  const bool free = grid.boundary() == Boundary::free_space;
  const double m2 = system.mass() * system.mass();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t n = 1; n < g.levels(); ++n) {
    const auto div = g_divergence(g, n);
    const auto src = system.source_density(psi.times[n]);
    for (std::size_t s = 0; s < grid.sites(); ++s) {
      if (free) {
        const auto ijk = grid.unravel(s);
        bool face = false;
        for (int a = 0; a < 3; ++a) face = face || ijk[a] == 0 || ijk[a] + 1 == grid.dim(a);
        if (face) continue;
      }
      for (std::size_t c = 0; c < 4; ++c) {
        scale = std::max(scale, std::abs(div(c, s)));
        worst = std::max(worst, std::abs(div(c, s) + m2 * psi.snapshots[n](c, s) - src(c, s)));
      }
    }
  }
  if (scale == 0.0) return worst;
  return worst / scale;
}

DiracDensity dirac_density(const FieldHistory<cplx, 4>& psi, const GField& g, std::size_t level,
                           const GammaSet& gammas) {
  if (level + 1 >= psi.size() || level >= g.levels()) throw Error("Dirac density level out of range");
  const Grid3& grid = psi.grid();
  for (const auto& gm : g.g) require_same_grid(grid, gm.grid(), "Dirac density");
  const auto& now = psi.snapshots[level];
  const auto& next = psi.snapshots[level + 1];
  const double inv_dt = 1.0 / psi.spacing();

  // d_mu psi with the g_from_psi stencils, and the partner node of each difference.
  std::array<SpinorLattice, 4> d{SpinorLattice(grid), SpinorLattice(grid), SpinorLattice(grid),
                                 SpinorLattice(grid)};
  for (std::size_t k = 0; k < now.data().size(); ++k) {
    d[0].data()[k] = (next.data()[k] - now.data()[k]) * inv_dt;
  }
  for (int a = 0; a < 3; ++a) {
    for (std::size_t c = 0; c < 4; ++c) forward_difference<cplx>(grid, a, now.component(c), d[a + 1].component(c));
  }
  auto partner = [&](int a, std::size_t s) {
    const auto ijk = grid.unravel(s);
    const std::size_t n = grid.dim(a);
    Index3 p = ijk;
    if (ijk[a] + 1 < n) {
      p[a] = ijk[a] + 1;
    } else if (grid.boundary() == Boundary::periodic) {
      p[a] = 0;
    } else {
      p[a] = ijk[a] - 1;
    }
    return grid.index(p[0], p[1], p[2]);
  };

  DiracDensity out{ScalarLattice(grid), ScalarLattice(grid), ScalarLattice(grid), 0.0, {}};
  const cplx inv_i = -kI;
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    cplx x_kin{};
    cplx x_g{};
    double mag = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
      Spinor4 bar_src{};
      const std::size_t other = mu == 0 ? s : partner(mu - 1, s);
      const auto& second = mu == 0 ? next : now;
      for (std::size_t c = 0; c < 4; ++c) bar_src[c] = 0.5 * (now(c, s) + second(c, other));
      const cplx kin = gammas.bilinear(bar_src, mu, spinor_at(d[mu], s));
      const cplx cpl = gammas.bilinear(bar_src, mu, spinor_at(g.g[mu].snapshots[level], s));
      x_kin += kin;
      x_g += cpl;
      mag += std::abs(kin);
    }
    out.kinetic(0, s) = -2.0 * (inv_i * x_kin).real();
    out.coupling(0, s) = 2.0 * (inv_i * x_g).real();
    out.total(0, s) = out.kinetic(0, s) + out.coupling(0, s);
    out.scale = std::max(out.scale, mag);
  }
  auto& r = out.report;
  r.density = "dirac";
  r.time = psi.times[level];
  r.dt = psi.spacing();
  r.spacing = grid.spacing();
  r.dims = grid.dims();
  r.boundary = grid.boundary();
  r.term("kinetic_A") = integrate(out.kinetic);
  r.term("source_coupling") = integrate(out.coupling);
  r.finalize();
  return out;
}

double mass_term_density(const FieldHistory<cplx, 4>& psi, std::size_t slice, double mass) {
  if (slice >= psi.size()) throw Error("slice out of range");
  const auto& f = psi.snapshots[slice];
  const auto& gammas = GammaSet::dirac();
  double acc = 0.0;
  for (std::size_t s = 0; s < f.sites(); ++s) {
    const Spinor4 v = spinor_at(f, s);
    acc += gammas.scalar_bilinear(v, v).real();
  }
  return -mass * acc * f.grid().cell_volume();
}

}  // namespace xfl
