#include <benchmark/benchmark.h>

#include <random>

#include "xfl/calculus.hpp"
#include "xfl/dynamics.hpp"
#include "xfl/spectral.hpp"
#include "xfl/spinor.hpp"
#include "xfl/statics.hpp"

using namespace xfl;

namespace {

template <class T, std::size_t N>
void fill(Lattice<T, N>& f, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (auto& v : f.data()) {
    if constexpr (is_complex_v<T>) {
      const double re = nd(rng);
      v = T(re, nd(rng));
    } else {
      v = nd(rng);
    }
  }
}

void BM_Laplacian(benchmark::State& state) {
  const auto g = Grid3::cube(static_cast<std::size_t>(state.range(0)), 1.0, Boundary::periodic);
  ScalarLattice f(g);
  fill(f, 1);
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(f));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.sites()));
}
BENCHMARK(BM_Laplacian)->Arg(32)->Arg(64);

void BM_PoissonFreeSpace(benchmark::State& state) {
  const auto g = Grid3::cube(static_cast<std::size_t>(state.range(0)), 1.0, Boundary::free_space);
  ChargeSpec q;
  q.position = g.center();
  const auto rho = deposit_charge(g, q);
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson(rho, 1.0));
}
BENCHMARK(BM_PoissonFreeSpace)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PoissonPeriodic(benchmark::State& state) {
  const auto g = Grid3::cube(static_cast<std::size_t>(state.range(0)), 1.0, Boundary::periodic);
  ScalarLattice rho(g);
  fill(rho, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson(rho, 1.0));
}
BENCHMARK(BM_PoissonPeriodic)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LeapfrogStep(benchmark::State& state) {
  const auto g = Grid3::cube(static_cast<std::size_t>(state.range(0)), 1.0, Boundary::periodic);
  ScalarLattice f(g);
  fill(f, 3);
  ScalarWave st(WaveSystem<double, 1>(g, 0.5), f, 0.5 * cfl_limit(g));
  for (auto _ : state) st.step();
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.sites()));
}
BENCHMARK(BM_LeapfrogStep)->Arg(32)->Arg(64);

void BM_Decompose(benchmark::State& state) {
  const auto g = Grid3::cube(16, 0.5, Boundary::periodic);
  FieldHistory<double, 4> h;
  h.step_dt = 0.1;
  for (int n = 0; n < state.range(0); ++n) {
    h.times.push_back(0.1 * n);
    h.snapshots.emplace_back(g);
    fill(h.snapshots.back(), 10 + n);
  }
  for (auto _ : state) benchmark::DoNotOptimize(decompose(h));
}
BENCHMARK(BM_Decompose)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DiracDensity(benchmark::State& state) {
  const auto g = Grid3::cube(16, 0.5, Boundary::periodic);
  FieldHistory<cplx, 4> psi;
  for (int n = 0; n < 3; ++n) {
    psi.times.push_back(0.1 * n);
    psi.snapshots.emplace_back(g);
    fill(psi.snapshots.back(), 20 + n);
  }
  const auto gf = g_from_psi(psi);
  for (auto _ : state) benchmark::DoNotOptimize(dirac_density(psi, gf, 0));
}
BENCHMARK(BM_DiracDensity)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
