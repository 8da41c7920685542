#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/fields.hpp"
#include "xfl/lagrangian.hpp"

using namespace xfl;
using xfl::testing::blank_history;
using xfl::testing::random_history;

namespace {

constexpr double kPi = std::numbers::pi;

Grid3 periodic(Index3 dims, double h) { return Grid3(dims, h, {}, Boundary::periodic); }

// trilinear weights from first principles
double cic_sample(const Lattice<double, 4>& a, std::size_t c, const Vec3& x) {
  const auto& g = a.grid();
  double acc = 0.0;
  const double u = x[0] / g.spacing(), v = x[1] / g.spacing(), w = x[2] / g.spacing();
  const auto i0 = static_cast<std::size_t>(std::floor(u)), j0 = static_cast<std::size_t>(std::floor(v)),
             k0 = static_cast<std::size_t>(std::floor(w));
  const double fu = u - i0, fv = v - j0, fw = w - k0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const double wt = (di ? fu : 1 - fu) * (dj ? fv : 1 - fv) * (dk ? fw : 1 - fw);
        acc += wt * a.at(c, i0 + di, j0 + dj, k0 + dk);
      }
  return acc;
}

}  // namespace

TEST(FieldStrength, ConstantPotentialHasNoField) {
  auto h = blank_history<double, 4>(periodic({8, 8, 8}, 0.5), 3, 0.1);
  for (auto& s : h.snapshots)
    for (std::size_t mu = 0; mu < 4; ++mu)
      for (auto& v : s.component(mu)) v = 1.0 + mu;
  const auto f = field_strength(h, 1);
  EXPECT_EQ(f.data().max_abs(), 0.0);
  const auto r = maxwell_density(h, 1);
  EXPECT_EQ(r.total, cplx(0.0));
}

TEST(FieldStrength, PureGaugeVanishes) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  const double dt = 0.1;
  std::mt19937_64 rng(5);
  const auto lambda = random_history<double, 1>(grid, 5, dt, rng);
  const auto a = xfl::testing::pure_gauge(lambda);
  const auto f = field_strength(a, 1);
  double scale = 0.0;
  for (const auto& s : a.snapshots) scale = std::max(scale, s.max_abs());
  EXPECT_LE(f.data().max_abs(), 1e-10 * scale / grid.spacing());
}

TEST(FieldStrength, CoulombPotentialGivesPlusE) {
  const double h = 0.5;
  const auto grid = Grid3::cube(24, h, Boundary::free_space);
  const Vec3 q{5.8, 6.1, 5.9};
  auto hist = blank_history<double, 4>(grid, 3, 0.1);
  for (auto& s : hist.snapshots)
    for (std::size_t site = 0; site < grid.sites(); ++site) {
      const auto p = grid.position(site);
      const double r = norm(Vec3{p[0] - q[0], p[1] - q[1], p[2] - q[2]});
      s(0, site) = 1.0 / (4 * kPi * r);
    }
  const auto f = field_strength(hist, 1);
  double worst = 0.0;
  int checked = 0;
  for (std::size_t site = 0; site < grid.sites(); ++site) {
    const auto p = grid.position(site);
    const Vec3 d{p[0] - q[0], p[1] - q[1], p[2] - q[2]};
    const double r = norm(d);
    const auto ijk = grid.unravel(site);
    if (r < 8 * h || ijk[0] == 0 || ijk[1] == 0 || ijk[2] == 0 || ijk[0] == 23 || ijk[1] == 23 || ijk[2] == 23) {
      continue;
    }
    const double e = 1.0 / (4 * kPi * r * r);
    for (int ax = 0; ax < 3; ++ax) {
      worst = std::max(worst, std::abs(f.lower(0, ax + 1, site) - e * d[ax] / r) / e);
      EXPECT_EQ(f.upper(0, ax + 1, site), -f.lower(0, ax + 1, site));
      EXPECT_EQ(f.lower(ax + 1, 0, site), -f.lower(0, ax + 1, site));
    }
    ++checked;
  }
  EXPECT_GT(checked, 1000);
  EXPECT_LE(worst, 0.02);
}

TEST(MaxwellDensity, ElectricMinusMagneticEnergy) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  const double k = 2 * kPi / 4.0;
  const double kd = std::sin(k * 0.5) / 0.5;
  const double volume = 512 * 0.125;
  // static A^0 = sin(kx): E_x = -kd cos(kx)
  auto e = blank_history<double, 4>(grid, 3, 0.1);
  // static A^1 = sin(ky): B_z = -kd cos(ky)
  auto b = blank_history<double, 4>(grid, 3, 0.1);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t s = 0; s < grid.sites(); ++s) {
      const auto p = grid.position(s);
      e.snapshots[n](0, s) = std::sin(k * p[0]);
      b.snapshots[n](1, s) = std::sin(k * p[1]);
    }
  const auto le = maxwell_density(e, 1);
  const auto lb = maxwell_density(b, 1);
  EXPECT_NEAR(le.term("kinetic_A").real(), 0.5 * kd * kd * volume / 2, 1e-12);
  EXPECT_NEAR(lb.term("kinetic_A").real(), -0.5 * kd * kd * volume / 2, 1e-12);
  EXPECT_FALSE(le.complex_valued);
  EXPECT_EQ(le.density, "maxwell");
}

TEST(MaxwellDensity, SourceCouplingSamplesPotential) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  std::mt19937_64 rng(9);
  const auto a = random_history<double, 4>(grid, 3, 0.1, rng);
  ChargeSpec rest;
  rest.value = 1.7;
  rest.position = {1.15, 1.8, 2.05};
  ChargeScenario sc{{rest}, 1.0, grid};
  const auto r = maxwell_density(a, 1, sc);
  EXPECT_NEAR(r.term("source_coupling").real(), -1.7 * cic_sample(a.snapshots[1], 0, rest.position), 1e-12);

  ChargeSpec moving = rest;
  moving.velocity = {0.3, -0.2, 0.1};
  moving.position = {1.0, 2.0, 2.0};
  sc.charges = {moving};
  const double t = a.times[1];
  const Vec3 x = moving.position_at(t);
  const double gamma = 1.0 / std::sqrt(1 - 0.14);
  double ua = cic_sample(a.snapshots[1], 0, x);
  for (int i = 0; i < 3; ++i) ua -= moving.velocity[i] * cic_sample(a.snapshots[1], i + 1, x);
  EXPECT_NEAR(maxwell_density(a, 1, sc).term("source_coupling").real(), -1.7 * gamma * ua, 1e-12);
}

TEST(ScalarDensity, ConstantFieldIsAllMass) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  auto h = blank_history<double, 1>(grid, 3, 0.1);
  for (auto& s : h.snapshots)
    for (auto& v : s.data()) v = 2.0;
  const auto r = scalar_density(h, 1, 0.6);
  EXPECT_EQ(r.term("kinetic_A"), cplx(0.0));
  EXPECT_NEAR(r.term("mass_term").real(), 0.5 * 0.36 * 4.0 * 64.0, 1e-12);
  EXPECT_THROW(scalar_density(h, 1, -1.0), Error);
}

TEST(ScalarDensity, PlaneWaveKineticMatchesStencilOracle) {
  const double h = 0.25, dt = 0.05, m = 1.0;
  const auto grid = periodic({32, 8, 8}, h);
  const double k = 2 * kPi / 8.0;
  const double w = std::sqrt(k * k + m * m);
  auto hist = blank_history<double, 1>(grid, 3, dt);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t s = 0; s < grid.sites(); ++s) hist.snapshots[n](0, s) = std::cos(k * grid.position(s)[0] - w * hist.times[n]);
  const auto r = scalar_density(hist, 1, m);
  const double volume = grid.sites() * h * h * h;
  const double wd = std::sin(w * dt) / dt, kd = std::sin(k * h) / h;
  EXPECT_NEAR(r.term("kinetic_A").real(), 0.5 * (wd * wd - kd * kd) * volume / 2, 1e-10);
  EXPECT_NEAR(r.term("mass_term").real(), 0.5 * m * m * volume / 2, 1e-10);
  // continuum virial: kinetic and mass integrals agree for an on-shell wave
  EXPECT_NEAR(r.term("kinetic_A").real() / r.term("mass_term").real(), 1.0, 0.02);
}

TEST(ScalarDensity, SourceCouplingUsesProperTimeWeight) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  auto h = blank_history<double, 1>(grid, 3, 0.1);
  for (auto& s : h.snapshots)
    for (auto& v : s.data()) v = 3.0;
  ChargeSpec q;
  q.value = 2.0;
  q.species = Species::scalar;
  q.position = {2.0, 2.0, 2.0};
  q.velocity = {0.6, 0.0, 0.0};
  const auto r = scalar_density(h, 1, 0.0, ChargeScenario{{q}, 1.0, grid});
  EXPECT_NEAR(r.term("source_coupling").real(), 2.0 * 0.8 * 3.0, 1e-12);
}

TEST(SplitIdentities, HoldOnRandomHistories) {
  std::mt19937_64 rng(11);
  const auto grid = periodic({8, 8, 8}, 0.5);
  const auto v = decompose(random_history<double, 4>(grid, 10, 0.1, rng));
  EXPECT_LE(kinetic_split_check(v), 1e-12);
  const auto s = decompose(random_history<double, 1>(grid, 12, 0.1, rng));
  EXPECT_LE(kinetic_split_check(s), 1e-12);

  // analytic signal: the negative part is zero and F_A = F_Ab = F_+
  auto z = blank_history<cplx, 4>(grid, 16, 0.1);
  const double w = 2 * kPi * 2 / (16 * 0.1);
  for (std::size_t n = 0; n < 16; ++n)
    for (std::size_t site = 0; site < grid.sites(); ++site)
      for (std::size_t mu = 0; mu < 4; ++mu) {
        z.snapshots[n](mu, site) = std::exp(cplx(0, -w * z.times[n] + 0.3 * mu)) * std::sin(2 * kPi * grid.position(site)[mu % 3] / 4.0);
      }
  const auto zs = decompose(z);
  EXPECT_LE(zs.minus.snapshots[3].max_abs(), 1e-10);
  EXPECT_LE(kinetic_split_check(zs), 1e-12);
  const auto rep = split_density(zs, 5);
  EXPECT_NEAR(std::abs(rep.term("kinetic_A") - rep.term("kinetic_B")), 0.0, 1e-9 * std::abs(rep.term("kinetic_A")));
  EXPECT_EQ(rep.density, "maxwell-split");
}

TEST(SplitDensity, RealHistoryGivesComplexDifferenceSector) {
  std::mt19937_64 rng(12);
  const auto s = decompose(random_history<double, 1>(periodic({8, 8, 8}, 0.5), 12, 0.1, rng));
  const auto rep = split_density(s, 4, 0.5);
  EXPECT_EQ(rep.density, "scalar-split");
  // A = B+ - B- is imaginary for a real input, so its bilinear kinetic term is real
  EXPECT_LE(std::abs(rep.term("kinetic_A").imag()), 1e-10 * std::abs(rep.term("kinetic_A")));
  EXPECT_LE(std::abs(rep.term("kinetic_B").imag()), 1e-10 * std::abs(rep.term("kinetic_B")));
}

TEST(EulerLagrange, SolverOutputSatisfiesTheStencil) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  ChargeSpec q;
  q.position = {1.3, 2.2, 1.9};
  q.velocity = {0.2, 0.1, 0.0};
  const auto sys = WaveSystem<double, 4>::from_scenario(ChargeScenario{{q}, 1.0, grid}, 0.0);
  std::mt19937_64 rng(3);
  Lattice<double, 4> init(grid);
  xfl::testing::fill_random(init, rng);
  const auto hist = record_history(WaveState<double, 4>(sys, init, 0.1), 12, 1);
  EXPECT_LE(euler_lagrange_residual(hist), 1e-10);

  const auto noise = random_history<double, 4>(grid, 6, 0.1, rng);
  EXPECT_GT(euler_lagrange_residual(noise), 1.0);

  auto strided = hist;
  strided.stride = 2;
  EXPECT_THROW(euler_lagrange_residual(strided), UnsupportedError);
  auto short_h = hist;
  short_h.snapshots.erase(short_h.snapshots.begin() + 2, short_h.snapshots.end());
  short_h.times.resize(2);
  EXPECT_THROW(euler_lagrange_residual(short_h), SamplingError);
}

TEST(EulerLagrange, ContinuumPlaneWaveConvergesAtSecondOrder) {
  const double m = 0.5, k = 2 * kPi / 4.0, w = std::sqrt(k * k + m * m);
  auto residual = [&](std::size_t nx) {
    const double h = 4.0 / nx;
    const auto grid = periodic({nx, 8, 8}, h);
    auto hist = blank_history<double, 1>(grid, 5, 0.2 * h);
    for (std::size_t n = 0; n < 5; ++n)
      for (std::size_t s = 0; s < grid.sites(); ++s)
        hist.snapshots[n](0, s) = std::cos(k * grid.position(s)[0] - w * hist.times[n]);
    return euler_lagrange_residual(hist, m);
  };
  const double ratio = residual(16) / residual(32);
  EXPECT_GE(ratio, 3.4);
  EXPECT_LE(ratio, 4.6);
}

TEST(CouplingTerm, ZeroChargeAndImaginaryDifference) {
  const auto grid = periodic({8, 8, 8}, 0.5);
  std::mt19937_64 rng(8);
  const auto split = decompose(random_history<double, 4>(grid, 10, 0.1, rng));
  const auto a = difference_field(split);
  ChargeSpec q;
  q.position = {1.1, 2.3, 0.7};
  q.velocity = {0.1, 0.0, 0.4};
  ChargeScenario sc{{q}, 1.0, grid};
  const cplx c = coupling_term(a.data, 4, sc);
  EXPECT_GT(std::abs(c.imag()), 0.0);
  EXPECT_LE(std::abs(c.real()), 1e-12 * std::abs(c.imag()));
  sc.charges[0].value = 0.0;
  EXPECT_EQ(coupling_term(a.data, 4, sc), cplx(0.0));
  EXPECT_THROW(coupling_term(a.data, 10, sc), Error);
}

TEST(LagrangianReport, TotalsAndSerialization) {
  LagrangianReport r;
  r.density = "maxwell";
  r.term("kinetic_A") = 1.5;
  r.term("source_coupling") = -0.25;
  r.finalize();
  EXPECT_EQ(r.total, cplx(1.25));
  EXPECT_FALSE(r.complex_valued);
  auto j = r.to_json();
  EXPECT_EQ(j["total"].get<double>(), 1.25);
  EXPECT_EQ(j["terms"]["kinetic_A"].get<double>(), 1.5);
  EXPECT_TRUE(j["metadata"].contains("boundary"));

  r.term("coupling_fV") = cplx(0.0, 2.0);
  r.finalize();
  EXPECT_TRUE(r.complex_valued);
  j = r.to_json();
  EXPECT_EQ(j["total"][1].get<double>(), 2.0);

  const auto header = LagrangianReport::csv_header();
  const auto row = r.csv_row();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_THROW(r.term("nonsense"), Error);
}
