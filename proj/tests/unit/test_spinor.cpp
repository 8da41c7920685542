#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/fields.hpp"
#include "xfl/spinor.hpp"

using namespace xfl;
using xfl::testing::blank_history;
using xfl::testing::random_history;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

ChargeSpec spinor_charge(Spinor4 lambda, double e = 1.0, Vec3 at = {1.7, 1.75, 1.8}) {
  ChargeSpec q;
  q.value = e;
  q.species = Species::spinor;
  q.lambda = lambda;
  q.position = at;
  return q;
}

double spinor_max_diff(const Spinor4& a, const Spinor4& b) {
  double d = 0.0;
  for (int c = 0; c < 4; ++c) d = std::max(d, std::abs(a[c] - b[c]));
  return d;
}

}  // namespace

TEST(Gamma, DiracRepresentation) {
  const auto& g = GammaSet::dirac();
  EXPECT_EQ(g.clifford_residual(), 0.0);
  EXPECT_EQ(g.hermiticity_residual(), 0.0);
  // direct anticommutator check against the metric
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          cplx acc{};
          for (int k = 0; k < 4; ++k) acc += g.gamma[mu][r][k] * g.gamma[nu][k][c] + g.gamma[nu][r][k] * g.gamma[mu][k][c];
          const double expect = (mu == nu && r == c) ? 2.0 * (mu == 0 ? 1.0 : -1.0) : 0.0;
          EXPECT_EQ(acc, cplx(expect));
        }
  EXPECT_EQ(g.gamma[0][2][2], cplx(-1.0));
  EXPECT_EQ(g.gamma[2][0][3], -I);
}

TEST(Gamma, VectorBilinearsAreReal) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const auto& g = GammaSet::dirac();
  for (int trial = 0; trial < 50; ++trial) {
    Spinor4 u;
    for (auto& v : u) v = cplx(nd(rng), nd(rng));
    for (int mu = 0; mu < 4; ++mu) EXPECT_LE(std::abs(g.bilinear(u, mu, u).imag()), 1e-14 * std::abs(g.bilinear(u, 0, u)));
    EXPECT_NEAR(g.scalar_bilinear(u, u).real(), std::norm(u[0]) + std::norm(u[1]) - std::norm(u[2]) - std::norm(u[3]), 1e-12);
    EXPECT_NEAR(dirac_norm(u), g.scalar_bilinear(u, u).real(), 1e-12);
  }
}

TEST(Lambda, Normalization) {
  const auto a = normalize_lambda({2.0, 0.0, 0.0, 0.0});
  EXPECT_LE(spinor_max_diff(a, {1.0, 0.0, 0.0, 0.0}), 1e-15);
  const auto b = normalize_lambda({1.0, 0.0, 0.5, 0.0});
  EXPECT_NEAR(dirac_norm(b), 1.0, 1e-14);
  EXPECT_NEAR(b[0].real(), 1.0 / std::sqrt(0.75), 1e-14);
  const auto c = normalize_lambda({cplx(0, 3.0), 4.0, 0.0, 0.0});
  EXPECT_NEAR(std::abs(c[0]), 0.6, 1e-14);
  EXPECT_THROW(normalize_lambda({0.0, 0.0, 1.0, 0.0}), NormalizationError);
  EXPECT_THROW(normalize_lambda({1.0, 0.0, 1.0, 0.0}), NormalizationError);
  EXPECT_THROW(normalize_lambda({0.0, 0.0, 0.0, 0.0}), NormalizationError);
}

TEST(SpinorWave, RelaxedProfileIsLambdaTimesScalar) {
  const auto grid = Grid3::cube(16, 0.5, Boundary::periodic);
  const Spinor4 lambda = normalize_lambda({1.0, cplx(0.0, 0.5), 0.3, 0.0});
  const auto psi = relax_spinor_wave(spinor_charge(lambda, 1.0, {3.7, 3.75, 3.8}), grid);
  ChargeSpec s = spinor_charge({1, 0, 0, 0}, 1.0, {3.7, 3.75, 3.8});
  s.species = Species::scalar;
  s.lambda.reset();
  auto state = ScalarWave(WaveSystem<double, 1>::from_scenario(ChargeScenario{{s}, 1.0, grid}, 0.0),
                          Lattice<double, 1>(grid), 0.9 * cfl_limit(grid));
  relax_to_static(state);
  const double peak = state.field().max_abs();
  double worst = 0.0;
  for (std::size_t site = 0; site < grid.sites(); ++site)
    for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, std::abs(psi(c, site) - lambda[c] * state.field()(0, site)));
  EXPECT_LE(worst, 1e-6 * peak);
}

TEST(SpinorWave, ZeroChargeAndEqualComponents) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  const auto zero = solve_spinor_wave(spinor_charge({1, 0, 0, 0}, 0.0), grid, 6);
  for (const auto& s : zero.snapshots) EXPECT_EQ(s.max_abs(), 0.0);

  const double r = 1.0 / std::sqrt(2.0);
  const auto hist = solve_spinor_wave(spinor_charge({r, r, 0, 0}), grid, 6);
  const auto& last = hist.snapshots.back();
  EXPECT_GT(last.max_abs(), 0.0);
  for (std::size_t site = 0; site < grid.sites(); ++site) {
    EXPECT_EQ(last(0, site), last(1, site));
    EXPECT_EQ(last(2, site), cplx(0.0));
    EXPECT_EQ(last(3, site), cplx(0.0));
  }
}

TEST(SpinorWave, SolverCommutesWithProjection) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  const Spinor4 lambda = normalize_lambda({0.8, cplx(0.1, 0.3), cplx(0.0, -0.2), 0.1});
  auto q = spinor_charge(lambda);
  q.velocity = {0.3, 0.1, -0.2};
  auto q0 = q;
  q0.lambda = Spinor4{1, 0, 0, 0};
  const auto full = solve_spinor_wave(q, grid, 10, 1, 0.4);
  const auto base = solve_spinor_wave(q0, grid, 10, 1, 0.4);
  double worst = 0.0, peak = 0.0;
  for (std::size_t n = 0; n < full.size(); ++n)
    for (std::size_t site = 0; site < grid.sites(); ++site)
      for (std::size_t c = 0; c < 4; ++c) {
        worst = std::max(worst, std::abs(full.snapshots[n](c, site) - lambda[c] * base.snapshots[n](0, site)));
        peak = std::max(peak, std::abs(base.snapshots[n](0, site)));
      }
  EXPECT_GT(peak, 0.0);
  EXPECT_LE(worst, 1e-14 * peak);
}

TEST(GField, ConstantAndPlaneWave) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  auto c = blank_history<cplx, 4>(grid, 4, 0.1);
  for (auto& s : c.snapshots)
    for (auto& v : s.data()) v = cplx(1.0, -2.0);
  const auto gc = g_from_psi(c);
  EXPECT_EQ(gc.levels(), 3u);
  for (const auto& gm : gc.g)
    for (const auto& s : gm.snapshots) EXPECT_EQ(s.max_abs(), 0.0);

  const double k = 2 * kPi / 4.0, w = 1.3, h = 0.5, dt = 0.1;
  auto p = blank_history<cplx, 4>(grid, 4, dt);
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t s = 0; s < grid.sites(); ++s)
      for (std::size_t a = 0; a < 4; ++a) p.snapshots[n](a, s) = (1.0 + a) * std::exp(I * (k * grid.position(s)[1] - w * p.times[n]));
  const auto gp = g_from_psi(p);
  double et = 0.0, ey = 0.0, ex = 0.0;
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t s = 0; s < grid.sites(); ++s)
      for (std::size_t a = 0; a < 4; ++a) {
        const cplx f = p.snapshots[n](a, s);
        et = std::max(et, std::abs(gp.g[0].snapshots[n](a, s) - f * (std::exp(-I * w * dt) - 1.0) / dt));
        ey = std::max(ey, std::abs(gp.g[2].snapshots[n](a, s) - f * (std::exp(I * k * h) - 1.0) / h));
        ex = std::max(ex, std::abs(gp.g[1].snapshots[n](a, s)));
      }
  EXPECT_LE(et, 1e-12);
  EXPECT_LE(ey, 1e-12);
  EXPECT_LE(ex, 1e-12);

  auto two = blank_history<cplx, 4>(grid, 2, dt);
  EXPECT_THROW(g_from_psi(two), SamplingError);
}

TEST(GField, DivergenceMatchesWaveOperator) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  auto q = spinor_charge(normalize_lambda({1.0, 0.2, 0.1, cplx(0, 0.1)}));
  q.velocity = {0.2, 0.0, 0.1};
  const auto psi = solve_spinor_wave(q, grid, 12, 1, 0.3);
  const auto g = g_from_psi(psi);
  EXPECT_LE(g_divergence_residual(psi, g, *psi.system), 1e-10);

  // a random history does not satisfy the equation
  std::mt19937_64 rng(7);
  const auto noise = random_history<cplx, 4>(grid, 6, psi.spacing(), rng);
  EXPECT_GT(g_divergence_residual(noise, g_from_psi(noise), *psi.system), 1e-3);
}

TEST(DiracDensity, CancelsForRandomHistories) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const auto b = trial % 2 ? Boundary::periodic : Boundary::free_space;
    const auto psi = random_history<cplx, 4>(Grid3::cube(8, 0.5, b), 5, 0.1, rng);
    const auto g = g_from_psi(psi);
    for (std::size_t level = 0; level < g.levels(); ++level) {
      const auto d = dirac_density(psi, g, level);
      EXPECT_GT(d.scale, 0.0);
      EXPECT_GT(d.kinetic.max_abs(), 0.0);
      EXPECT_LE(d.total.max_abs(), 1e-12 * d.scale);
    }
  }
}

TEST(DiracDensity, PlaneWaveWithoutCoupling) {
  const double k = 2 * kPi / 4.0, w = 0.9, h = 0.5, dt = 0.1;
  const auto grid = Grid3::cube(8, h, Boundary::periodic);
  const Spinor4 u{1.0, cplx(0.0, 0.5), 0.25, cplx(0.1, 0.2)};
  auto psi = blank_history<cplx, 4>(grid, 3, dt);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t s = 0; s < grid.sites(); ++s)
      for (std::size_t a = 0; a < 4; ++a) psi.snapshots[n](a, s) = u[a] * std::exp(I * (k * grid.position(s)[0] - w * psi.times[n]));
  auto g = g_from_psi(psi);
  for (auto& gm : g.g)
    for (auto& s : gm.snapshots)
      for (auto& v : s.data()) v = 0.0;
  const auto& gam = GammaSet::dirac();
  const double expect = 2.0 * gam.bilinear(u, 0, u).real() * std::sin(w * dt) / dt -
                        2.0 * gam.bilinear(u, 1, u).real() * std::sin(k * h) / h;
  const auto d = dirac_density(psi, g, 0);
  EXPECT_EQ(d.coupling.max_abs(), 0.0);
  for (std::size_t s = 0; s < grid.sites(); ++s) EXPECT_NEAR(d.kinetic(0, s), expect, 1e-12);
}

TEST(DiracDensity, ZeroFieldAndRange) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  const auto psi = blank_history<cplx, 4>(grid, 4, 0.1);
  const auto g = g_from_psi(psi);
  const auto d = dirac_density(psi, g, 1);
  EXPECT_EQ(d.total.max_abs(), 0.0);
  EXPECT_EQ(d.scale, 0.0);
  EXPECT_EQ(d.report.density, "dirac");
  EXPECT_THROW(dirac_density(psi, g, 3), Error);
}

TEST(MassTerm, Examples) {
  const auto grid = Grid3::cube(8, 0.5, Boundary::periodic);
  const double volume = 64.0;
  auto psi = blank_history<cplx, 4>(grid, 1, 0.1);
  for (std::size_t s = 0; s < grid.sites(); ++s) psi.snapshots[0](0, s) = 1.0;
  EXPECT_NEAR(mass_term_density(psi, 0, 1.0), -volume, 1e-12);
  EXPECT_EQ(mass_term_density(psi, 0, 0.0), 0.0);
  const double one = mass_term_density(psi, 0, 0.7);
  for (auto& v : psi.snapshots[0].data()) v *= 2.0;
  EXPECT_NEAR(mass_term_density(psi, 0, 0.7), 4.0 * one, 1e-12);
  // lower components enter with the opposite sign
  for (std::size_t s = 0; s < grid.sites(); ++s) psi.snapshots[0](2, s) = 2.0;
  EXPECT_NEAR(mass_term_density(psi, 0, 0.7), 0.0, 1e-12);
  EXPECT_THROW(mass_term_density(psi, 1, 0.7), Error);
}
