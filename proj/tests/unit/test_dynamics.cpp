#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "support/fields.hpp"
#include "xfl/dynamics.hpp"
#include "xfl/statics.hpp"

using namespace xfl;
using xfl::testing::fill_random;

namespace {

constexpr double kPi = std::numbers::pi;

ChargeSpec rest_charge(Vec3 p, double value = 1.0, Species species = Species::electric) {
  ChargeSpec q;
  q.value = value;
  q.position = p;
  q.species = species;
  return q;
}

double rel_max_diff(const ScalarLattice& a, const ScalarLattice& b) {
  return xfl::testing::max_abs_diff(a.data(), b.data()) / b.max_abs();
}

// Worst relative deviation of f from ref over the shell [5h, L/4] around p.
double shell_error(const ScalarLattice& f, std::span<const double> ref, const Vec3& p) {
  const auto& g = f.grid();
  const double L = static_cast<double>(g.dim(0)) * g.spacing();
  double worst = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const double r = norm(g.position(s) - p);
    if (r < 5 * g.spacing() || r > L / 4) continue;
    worst = std::max(worst, std::abs(f(0, s) / ref[s] - 1.0));
  }
  return worst;
}

}  // namespace

TEST(PointSource, CouplingsPerSpecies) {
  auto e = rest_charge({1, 1, 1}, 2.0);
  e.velocity = {0.6, 0.0, 0.0};
  const auto s1 = point_source<double, 1>(e);
  EXPECT_DOUBLE_EQ(s1.coupling[0], 2.0);
  auto sc = e;
  sc.species = Species::scalar;
  EXPECT_NEAR((point_source<double, 1>(sc).coupling[0]), 2.0 * 0.8, 1e-15);
  const auto v = point_source<double, 4>(e);
  EXPECT_NEAR(v.coupling[0], 2.0 / 0.8, 1e-14);
  EXPECT_NEAR(v.coupling[1], 2.0 * 0.6 / 0.8, 1e-14);
  EXPECT_EQ(v.coupling[2], 0.0);
  EXPECT_THROW((point_source<double, 4>(sc)), Error);
}

TEST(Leapfrog, ZeroStaysZero) {
  const auto g = Grid3::cube(8, 1.0, Boundary::periodic);
  ScalarWave st(WaveSystem<double, 1>(g, 0.3), ScalarLattice(g), 0.5 * cfl_limit(g));
  for (int n = 0; n < 10; ++n) st = step_scalar_wave(st);
  EXPECT_EQ(st.field().max_abs(), 0.0);
  EXPECT_EQ(st.steps_taken(), 10u);
  EXPECT_NEAR(st.t(), 10 * st.dt(), 1e-14);

  const auto fg = Grid3::cube(8, 1.0, Boundary::free_space);
  VectorWave vw(WaveSystem<double, 4>(fg, 0.0), FourVectorLattice(fg), 0.5 * cfl_limit(fg));
  for (int n = 0; n < 10; ++n) vw = step_vector_wave(vw);
  EXPECT_EQ(vw.field().max_abs(), 0.0);
}

TEST(Leapfrog, CflAndMassBoundsAreEnforced) {
  const auto g = Grid3::cube(8, 1.0, Boundary::periodic);
  const WaveSystem<double, 1> sys(g, 0.0);
  EXPECT_THROW(ScalarWave(sys, ScalarLattice(g), 0.91 * cfl_limit(g)), GeometryError);
  EXPECT_NO_THROW(ScalarWave(sys, ScalarLattice(g), 0.9 * cfl_limit(g)));
  EXPECT_THROW(ScalarWave(WaveSystem<double, 1>(g, 10.0), ScalarLattice(g), 0.9 * cfl_limit(g)), GeometryError);
  EXPECT_THROW((WaveSystem<double, 1>(g, -1.0)), Error);
}

TEST(Leapfrog, NonFiniteFieldRaisesInstability) {
  const auto g = Grid3::cube(8, 1.0, Boundary::periodic);
  ScalarLattice f(g);
  f(0, 17) = std::numeric_limits<double>::infinity();
  ScalarWave st(WaveSystem<double, 1>(g, 0.0), f, 0.5 * cfl_limit(g));
  EXPECT_THROW(st.step(), InstabilityError);
}

TEST(Leapfrog, PlaneWaveReturnsAfterOneLatticePeriod) {
  // With cos(theta) = 1 - dt^2 w_s^2 / 2 the scheme rotates the mode by
  // exactly theta per step, so N = 2 pi / theta steps close the period.
  const std::size_t n = 16;
  const double h = 0.5;
  const auto g = Grid3::cube(n, h, Boundary::periodic);
  const Vec3 k{2 * kPi / (n * h), 4 * kPi / (n * h), 0.0};
  double ws2 = 0.0;
  for (double ki : k) ws2 += 4.0 / (h * h) * std::pow(std::sin(ki * h / 2), 2);
  const std::size_t steps = 64;
  const double theta = 2 * kPi / steps;
  const double dt = 2 * std::sin(theta / 2) / std::sqrt(ws2);
  ASSERT_LE(dt, 0.9 * cfl_limit(g));
  ScalarLattice f(g), prev(g);
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const double c = std::cos(dot(k, g.position(s)));
    f(0, s) = c;
    prev(0, s) = c * std::cos(theta);
  }
  ScalarWave st(WaveSystem<double, 1>(g, 0.0), f, dt, prev);
  for (std::size_t i = 0; i < steps; ++i) st.step();
  EXPECT_LE(rel_max_diff(st.field(), f), 1e-6);
}

TEST(Leapfrog, ReversibleToRoundoff) {
  std::mt19937_64 rng(21);
  const auto g = Grid3::cube(16, 1.0, Boundary::periodic);
  ScalarLattice f(g);
  fill_random(f, rng);
  ScalarWave st(WaveSystem<double, 1>(g, 0.3), f, 0.9 * cfl_limit(g));
  for (int i = 0; i < 300; ++i) st.step();
  st.reverse();
  for (int i = 0; i < 300; ++i) st.step();
  st.reverse();
  EXPECT_LE(rel_max_diff(st.field(), f), 1e-10);
  EXPECT_NEAR(st.t(), 0.0, 1e-12);
}

TEST(Leapfrog, DiscreteEnergyDoesNotDrift) {
  std::mt19937_64 rng(4);
  const auto g = Grid3::cube(16, 1.0, Boundary::periodic);
  ScalarLattice f(g);
  fill_random(f, rng);
  for (double factor : {0.9, 0.09}) {
    ScalarWave st(WaveSystem<double, 1>(g, 0.3), f, factor * cfl_limit(g));
    st.step();
    const double e0 = st.discrete_energy();
    double drift = 0.0;
    for (int i = 0; i < 1000; ++i) {
      st.step();
      drift = std::max(drift, std::abs(st.discrete_energy() / e0 - 1.0));
    }
    EXPECT_LE(drift, 1e-4) << "dt factor " << factor;
  }
}

TEST(Leapfrog, SourcesSuperpose) {
  const auto g = Grid3::cube(12, 1.0, Boundary::free_space);
  const auto a = rest_charge({4.3, 5.1, 6.0});
  auto b = rest_charge({7.2, 6.6, 5.4}, -0.5);
  b.velocity = {0.0, 0.3, 0.0};
  auto run = [&](std::vector<ChargeSpec> qs) {
    ChargeScenario sc{std::move(qs), 1.0, g};
    ScalarWave st(WaveSystem<double, 1>::from_scenario(sc, 0.2), ScalarLattice(g), 0.5 * cfl_limit(g));
    for (int i = 0; i < 40; ++i) st.step();
    return st.field();
  };
  const auto both = run({a, b});
  const auto sum = run({a}) + run({b});
  EXPECT_LE(rel_max_diff(both, sum), 1e-10);
}

TEST(Leapfrog, PeriodicSourceIsNeutralized) {
  const auto g = Grid3::cube(8, 1.0, Boundary::periodic);
  ChargeScenario sc{{rest_charge({3.3, 2.2, 5.5})}, 1.0, g};
  const auto sys = WaveSystem<double, 1>::from_scenario(sc, 0.0);
  const auto rho = sys.source_density(0.0);
  double total = 0.0;
  for (double v : rho.data()) total += v;
  EXPECT_NEAR(total, 0.0, 1e-12);
}

TEST(Relaxation, ScalarMatchesPoissonInTheShell) {
  const auto g = Grid3::cube(64, 1.0, Boundary::free_space);
  const auto q = rest_charge(g.center());
  ChargeScenario sc{{q}, 1.0, g};
  ScalarWave st(WaveSystem<double, 1>::from_scenario(sc, 0.0), ScalarLattice(g), 0.9 * cfl_limit(g));
  relax_to_static(st);
  const auto ref = solve_charge(g, q, 1.0);
  EXPECT_LE(shell_error(st.field(), ref.potential.data(), q.position), 0.01);
}

TEST(Relaxation, VectorRestChargeSourcesOnlyTheTimeComponent) {
  const auto g = Grid3::cube(48, 1.0, Boundary::free_space);
  const auto q = rest_charge(g.center(), 1.0, Species::vector);
  ChargeScenario sc{{q}, 1.0, g};
  VectorWave st(WaveSystem<double, 4>::from_scenario(sc, 0.0), FourVectorLattice(g), 0.9 * cfl_limit(g));
  relax_to_static(st);
  ScalarLattice b0(g);
  std::vector<double> coulomb(g.sites(), 1.0);
  for (std::size_t s = 0; s < g.sites(); ++s) {
    b0(0, s) = st.field()(0, s);
    const double r = norm(g.position(s) - q.position);
    if (r > 0) coulomb[s] = 1.0 / (4 * kPi * r);
  }
  EXPECT_LE(shell_error(b0, coulomb, q.position), 0.02);
  for (int c = 1; c < 4; ++c) {
    for (double v : st.field().component(c)) ASSERT_LE(std::abs(v), 1e-12);
  }
}

TEST(Relaxation, BoostedSourceCurrentRatio) {
  const auto g = Grid3::cube(16, 1.0, Boundary::free_space);
  auto q = rest_charge({5.0, 7.5, 7.5}, 1.0, Species::vector);
  q.velocity = {0.5, 0.0, 0.0};
  ChargeScenario sc{{q}, 1.0, g};
  VectorWave st(WaveSystem<double, 4>::from_scenario(sc, 0.0), FourVectorLattice(g), 0.5 * cfl_limit(g));
  for (int i = 0; i < 60; ++i) st.step();
  ChargeSpec now = q;
  now.position = q.position_at(st.t());
  double b0 = 0.0, b1 = 0.0;
  for_each_deposition_node(g, now.position, Deposition::cloud_in_cell, [&](std::size_t site, double w) {
    b0 += w * st.field()(0, site);
    b1 += w * st.field()(1, site);
  });
  EXPECT_NEAR(b1 / b0, 0.5, 0.025);
}

TEST(Relaxation, GivesUpAfterMaxSteps) {
  const auto g = Grid3::cube(16, 1.0, Boundary::free_space);
  ChargeScenario sc{{rest_charge(g.center())}, 1.0, g};
  ScalarWave st(WaveSystem<double, 1>::from_scenario(sc, 0.0), ScalarLattice(g), 0.9 * cfl_limit(g));
  RelaxationOptions opts;
  opts.max_steps = 5;
  EXPECT_THROW(relax_to_static(st, opts), SamplingError);
}

TEST(Dispersion, ClosedFormFrequencies) {
  struct Case {
    double k, m, tol;
  };
  for (const auto& c : {Case{0.0, 0.5, 0.005}, Case{0.5, 0.0, 0.01}, Case{0.3, 0.4, 0.01}}) {
    const double kx = c.k > 0 ? c.k : 0.5;
    const auto g = Grid3({48, 8, 8}, 2 * kPi / (kx * 48), {}, Boundary::periodic);
    ASSERT_LE(c.k * g.spacing(), 0.3);
    const double exact = std::hypot(c.k, c.m);
    const double dt = 0.5 * cfl_limit(g);
    const auto steps = static_cast<std::size_t>(6 * 2 * kPi / exact / dt);
    const double w = measure_dispersion(g, {c.k, 0, 0}, c.m, steps, 0.5);
    EXPECT_NEAR(w, exact, c.tol * exact) << "k=" << c.k << " m=" << c.m;
  }
}

TEST(Dispersion, RejectsBadInputs) {
  const auto g = Grid3({48, 8, 8}, 2 * kPi / (0.5 * 48), {}, Boundary::periodic);
  EXPECT_THROW(measure_dispersion(g, {0.5, 0, 0}, 0.0, 100), SamplingError);
  EXPECT_THROW(measure_dispersion(g, {0.37, 0, 0}, 0.0, 2000), GeometryError);
  EXPECT_THROW(measure_dispersion(Grid3::cube(8, 1.0, Boundary::free_space), {0, 0, 0}, 0.5, 2000),
               UnsupportedError);
}

TEST(History, SnapshotCountsAndTimes) {
  const auto g = Grid3::cube(8, 1.0, Boundary::periodic);
  ScalarLattice f(g, 1.0);
  ScalarWave st(WaveSystem<double, 1>(g, 0.5), f, 0.5 * cfl_limit(g));
  const auto h0 = record_history(st, 0, 1);
  EXPECT_EQ(h0.size(), 1u);
  const auto h1 = record_history(st, 12, 1);
  EXPECT_EQ(h1.size(), 13u);
  const auto h3 = record_history(st, 12, 3);
  EXPECT_EQ(h3.size(), 5u);
  EXPECT_NEAR(h3.spacing(), 3 * st.dt(), 1e-15);
  EXPECT_NO_THROW(h3.require_uniform());
  auto bad = h3;
  bad.times[2] += 0.01;
  EXPECT_THROW(bad.require_uniform(), FormatError);
  // identical inputs, identical output
  const auto again = record_history(st, 12, 1);
  for (std::size_t n = 0; n < again.size(); ++n) {
    EXPECT_EQ(xfl::testing::max_abs_diff(again.snapshots[n].data(), h1.snapshots[n].data()), 0.0);
  }
}

TEST(History, SaveLoadRoundTrip) {
  std::mt19937_64 rng(8);
  const auto g = Grid3({8, 9, 10}, 0.5, {}, Boundary::periodic);
  SpinorLattice f(g);
  fill_random(f, rng);
  SpinorWave st(WaveSystem<cplx, 4>(g, 0.1), f, 0.5 * cfl_limit(g));
  const auto h = record_history(st, 6, 2);
  const auto dir = std::filesystem::temp_directory_path() / "xfl_history_test";
  std::filesystem::create_directories(dir);
  save_history(dir / "psi", h);
  const auto back = load_history<cplx, 4>(dir / "psi");
  ASSERT_EQ(back.size(), h.size());
  EXPECT_EQ(back.stride, 2u);
  EXPECT_DOUBLE_EQ(back.step_dt, h.step_dt);
  for (std::size_t n = 0; n < h.size(); ++n) {
    EXPECT_EQ(back.times[n], h.times[n]);
    for (std::size_t i = 0; i < h.snapshots[n].data().size(); ++i) {
      ASSERT_EQ(back.snapshots[n].data()[i], h.snapshots[n].data()[i]);
    }
  }
  EXPECT_THROW((load_history<double, 1>(dir / "psi")), FormatError);
  std::filesystem::remove_all(dir);
}
