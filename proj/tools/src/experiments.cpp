#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "xfl/calculus.hpp"
#include "xfl/dynamics.hpp"
#include "xfl/lagrangian.hpp"
#include "xfl/spectral.hpp"
#include "xfl/spinor.hpp"
#include "xfl/statics.hpp"

namespace xfl::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T, std::size_t N>
double max_abs(const FieldHistory<T, N>& h) {
  double m = 0.0;
  for (const auto& s : h.snapshots) m = std::max(m, s.max_abs());
  return m;
}

// max |f(a) - b| over all entries of two histories of the same shape.
template <class A, class B, std::size_t N, class Fn>
double max_diff(const FieldHistory<A, N>& a, const FieldHistory<B, N>& b, Fn&& f) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const auto da = a.snapshots[n].data();
    const auto db = b.snapshots[n].data();
    for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(f(da[i]) - db[i]));
  }
  return m;
}

template <class T, std::size_t N>
FieldHistory<T, N> blank_history(const Grid3& grid, std::size_t snapshots, double dt) {
  FieldHistory<T, N> h;
  h.step_dt = dt;
  for (std::size_t n = 0; n < snapshots; ++n) {
    h.times.push_back(static_cast<double>(n) * dt);
    h.snapshots.emplace_back(grid);
  }
  return h;
}

template <class T, std::size_t N>
FieldHistory<T, N> random_history(const Grid3& grid, std::size_t snapshots, double dt, std::mt19937_64& rng) {
  auto h = blank_history<T, N>(grid, snapshots, dt);
  std::normal_distribution<double> normal;
  for (auto& s : h.snapshots) {
    for (auto& v : s.data()) {
      if constexpr (is_complex_v<T>) {
        const double re = normal(rng);
        v = T(re, normal(rng));
      } else {
        v = normal(rng);
      }
    }
  }
  return h;
}

ChargeScenario scenario_of(const ScenarioConfig& c, std::vector<ChargeSpec> charges, const Grid3& grid) {
  ChargeScenario s{std::move(charges), c.epsilon0, grid};
  s.validate();
  return s;
}

// Two charges symmetric about the grid center along x, R h apart.
ChargeScenario pair_at(const ScenarioConfig& c, double separation) {
  const auto grid = c.grid.grid();
  auto charges = c.charges;
  const Vec3 mid = grid.center();
  const double half = 0.5 * separation * grid.spacing();
  charges[0].position = {mid[0] - half, mid[1], mid[2]};
  charges[1].position = {mid[0] + half, mid[1], mid[2]};
  for (auto& q : charges) {
    q.species = Species::electric;
    q.velocity = {};
  }
  return scenario_of(c, std::move(charges), grid);
}

double coulomb_energy(const ScenarioConfig& c, double r) {
  return c.charges[0].value * c.charges[1].value / (4.0 * kPi * c.epsilon0 * r);
}

double coulomb_force(const ScenarioConfig& c, double r) {
  return c.charges[0].value * c.charges[1].value / (4.0 * kPi * c.epsilon0 * r * r);
}

// Short form for check names (0.3 rather than 0.29999999999999999).
std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double rel(double measured, double exact) { return std::abs(measured - exact) / std::abs(exact); }

}  // namespace

RunReport cmd_coulomb_check(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "coulomb-check";
  r.columns = {"R", "W_int", "W_analytic", "F_measured", "F_analytic", "rel_err"};
  const double h = c.grid.h;
  for (double sep : c.separations) {
    const auto s = pair_at(c, sep);
    const double R = sep * h;
    const double w = energy_report(s).interaction_term;
    const double f = force_from_energy_gradient(s, 1)[0];
    const double fa = coulomb_force(c, R);
    const double err = rel(f, fa);
    r.add_row({R, w, coulomb_energy(c, R), f, fa, err});
    if (sep >= 8.0) r.check_at_most("force_rel_err_R" + short_num(sep) + "h", err, 0.03);
  }
  return r;
}

RunReport cmd_energy_scan(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "energy-scan";
  r.columns = {"R",       "W_total", "W_self",      "W_int",          "W_analytic", "W_rel_err",
               "F_cross", "F_total", "F_partner", "cross_total_rel", "newton_abs"};
  const double h = c.grid.h;
  for (double sep : c.separations) {
    const auto s = pair_at(c, sep);
    const double R = sep * h;
    const auto e = energy_report(s);
    double self = 0.0;
    for (double t : e.self_terms) self += t;
    const double wa = coulomb_energy(c, R);
    const double f_cross = force_from_energy_gradient(s, 1)[0];
    const double f_total = force_from_total_energy_gradient(s, 1)[0];
    const double f_partner = force_from_energy_gradient(s, 0)[0];
    const double cross_total = rel(f_cross, f_total);
    const double newton = std::abs(f_cross + f_partner);
    r.add_row({R, e.total_W, self, e.interaction_term, wa, rel(e.interaction_term, wa), f_cross, f_total,
               f_partner, cross_total, newton});
    const std::string tag = "_R" + short_num(sep) + "h";
    r.check_at_most("energy_rel_err" + tag, rel(e.interaction_term, wa), 0.02);
    r.check_at_most("cross_vs_total_gradient" + tag, cross_total, 0.01);
    r.check_at_most("newton_third_law" + tag, newton, 1e-8);
  }
  return r;
}

RunReport cmd_selfenergy_scan(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "selfenergy-scan";
  r.columns = {"h", "n", "C", "hC"};
  std::vector<double> hc;
  std::optional<std::pair<Grid3, ChargeSpec>> first;
  for (double h : c.h_list) {
    const auto n = static_cast<std::size_t>(std::lround(c.extent / h));
    const auto grid = Grid3::cube(n, h, Boundary::free_space);
    ChargeSpec q = c.charges.front();
    q.species = Species::electric;
    q.position = grid.center();
    q.velocity = {};
    const double C = self_energy(q, grid, c.epsilon0);
    r.add_row({h, static_cast<double>(n), C, h * C});
    hc.push_back(h * C);
    if (!first) first.emplace(grid, q);
  }
  if (hc.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(hc.begin(), hc.end());
    double mean = 0.0;
    for (double v : hc) mean += v;
    mean /= static_cast<double>(hc.size());
    r.check_at_most("hC_spread", (*hi - *lo) / std::abs(mean), 0.10);
  }
  auto [grid, q] = *first;
  const double c1 = self_energy(q, grid, c.epsilon0);
  q.value *= 2.0;
  const double c2 = self_energy(q, grid, c.epsilon0);
  r.check_at_most("charge_squared_scaling", std::abs(c2 / c1 / 4.0 - 1.0), 1e-12);
  return r;
}

RunReport cmd_dispersion(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "dispersion";
  r.columns = {"k", "m", "h", "kh", "dt", "steps", "omega_measured", "omega_exact", "rel_err"};
  const std::size_t nx = c.dispersion_nx;
  for (std::size_t n = 0; n < c.k_list.size(); ++n) {
    const double k = c.k_list[n];
    const double m = c.m_list[n];
    const double h = k > 0.0 ? 2.0 * kPi / (k * static_cast<double>(nx)) : c.dispersion_h0;
    const Grid3 grid({nx, kMinSolverCells, kMinSolverCells}, h, {}, Boundary::periodic);
    const double dt = c.dynamics.dt_factor * cfl_limit(grid);
    const double exact = std::sqrt(k * k + m * m);
    const auto steps = static_cast<std::size_t>(std::ceil(c.periods * 2.0 * kPi / exact / dt));
    const double w = measure_dispersion(grid, {k, 0.0, 0.0}, m, steps, c.dynamics.dt_factor);
    const double err = rel(w, exact);
    r.add_row({k, m, h, k * h, dt, static_cast<double>(steps), w, exact, err});
    r.check_at_most("omega_rel_err_k" + short_num(k) + "_m" + short_num(m), err, 0.01);
  }
  return r;
}

namespace {

template <class T, std::size_t N>
void decompose_report(RunReport& r, const FieldHistory<T, N>& history, const ScenarioConfig& c,
                      const std::filesystem::path& out_dir) {
  const auto split = decompose(history);
  const auto diff = difference_field(split);
  const auto sum = sum_field(split);
  const double scale = max_abs(history);
  const double h3 = history.grid().cell_volume();

  r.columns = {"t", "norm2_B", "norm2_plus", "norm2_minus", "norm2_difference", "norm2_sum"};
  auto norm2 = [&](const auto& lat) {
    double s = 0.0;
    for (const auto& v : lat.data()) s += std::norm(v);
    return s * h3;
  };
  for (std::size_t n = 0; n < history.size(); ++n) {
    r.add_row({history.times[n], norm2(history.snapshots[n]), norm2(split.plus.snapshots[n]),
               norm2(split.minus.snapshots[n]), norm2(diff.data.snapshots[n]), norm2(sum.data.snapshots[n])});
  }

  // plus + minus against the input
  double round_trip = 0.0;
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto a = history.snapshots[n].data();
    const auto p = split.plus.snapshots[n].data();
    const auto m = split.minus.snapshots[n].data();
    for (std::size_t i = 0; i < a.size(); ++i) round_trip = std::max(round_trip, std::abs(p[i] + m[i] - cplx(a[i])));
  }
  r.check_at_most("round_trip", scale > 0.0 ? round_trip / scale : round_trip, 1e-12);
  if constexpr (!is_complex_v<T>) {
    const double conj = max_diff(split.plus, split.minus, [](cplx v) { return std::conj(v); });
    r.check_at_most("conjugate_pair", scale > 0.0 ? conj / scale : conj, 1e-12);
  }
  const auto again = decompose(split.plus);
  const double plus_scale = max_abs(split.plus);
  const double idem = max_diff(again.plus, split.plus, [](cplx v) { return v; });
  r.check_at_most("idempotence", plus_scale > 0.0 ? idem / plus_scale : idem, 1e-10);
  if (history.grid().boundary() == Boundary::periodic) {
    const double direct = spacetime_norm2(history);
    const double modes = mode_spectrum(history).total_power();
    r.check_at_most("parseval", direct > 0.0 ? std::abs(modes - direct) / direct : std::abs(modes), 1e-10);
  }
  try {
    r.metrics.emplace_back("independence_ratio", independence_check(diff, sum));
  } catch (const DegenerateInputError&) {
    r.metrics.emplace_back("independence_ratio", kNaN);
  }
  r.metrics.emplace_back("snapshot_dt", history.spacing());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    save_split(out_dir / "decompose", split);
  }
  if (c.signal == "cosine") {
    // exact split of cos(k x) cos(w t): plus = 1/2 exp(-i w t) cos(k x)
    const auto& grid = history.grid();
    const double w = 2.0 * kPi * c.cycles / (static_cast<double>(history.size()) * history.spacing());
    const double k = 2.0 * kPi / (static_cast<double>(grid.dim(0)) * grid.spacing());
    double err = 0.0;
    for (std::size_t n = 0; n < history.size(); ++n) {
      const cplx phase = 0.5 * std::exp(cplx(0.0, -w * history.times[n]));
      for (std::size_t site = 0; site < grid.sites(); ++site) {
        const double g = std::cos(k * (grid.position(site)[0] - grid.origin()[0]));
        err = std::max(err, std::abs(split.plus.snapshots[n](0, site) - phase * g));
      }
    }
    r.check_at_most("cosine_plus_exact", err, 1e-10);
  }
}

template <class T, std::size_t N>
void decompose_file(RunReport& r, const ScenarioConfig& c, const std::filesystem::path& out_dir) {
  decompose_report(r, load_history<T, N>(c.input), c, out_dir);
}

}  // namespace

RunReport cmd_decompose(const ScenarioConfig& c, const std::filesystem::path& out_dir) {
  RunReport r;
  r.experiment = "decompose";
  const auto grid = c.grid.grid();
  std::mt19937_64 rng(c.seed);
  if (c.signal == "cosine") {
    auto h = blank_history<double, 1>(grid, c.snapshots, c.sample_dt);
    const double w = 2.0 * kPi * c.cycles / (static_cast<double>(c.snapshots) * c.sample_dt);
    const double k = 2.0 * kPi / (static_cast<double>(grid.dim(0)) * grid.spacing());
    for (std::size_t n = 0; n < h.size(); ++n) {
      for (std::size_t site = 0; site < grid.sites(); ++site) {
        h.snapshots[n](0, site) =
            std::cos(k * (grid.position(site)[0] - grid.origin()[0])) * std::cos(w * h.times[n]);
      }
    }
    decompose_report(r, h, c, out_dir);
  } else if (c.signal == "random") {
    decompose_report(r, random_history<double, 1>(grid, c.snapshots, c.sample_dt, rng), c, out_dir);
  } else if (c.signal == "wave") {
    Lattice<double, 1> init(grid);
    std::normal_distribution<double> normal;
    for (auto& v : init.data()) v = normal(rng);
    WaveState<double, 1> state(WaveSystem<double, 1>(grid, c.dynamics.mass), init,
                               c.dynamics.dt_factor * cfl_limit(grid));
    decompose_report(r, record_history(state, (c.snapshots - 1) * c.dynamics.stride, c.dynamics.stride), c,
                     out_dir);
  } else {
    std::ifstream meta(c.input + ".json");
    if (!meta) throw FormatError("cannot open " + c.input + ".json");
    const auto j = nlohmann::json::parse(meta);
    const auto comps = j.at("components").get<std::size_t>();
    const bool cx = j.at("complex").get<bool>();
    if (comps == 1 && !cx) decompose_file<double, 1>(r, c, out_dir);
    else if (comps == 1) decompose_file<cplx, 1>(r, c, out_dir);
    else if (comps == 4 && !cx) decompose_file<double, 4>(r, c, out_dir);
    else if (comps == 4) decompose_file<cplx, 4>(r, c, out_dir);
    else throw FormatError("history has " + std::to_string(comps) + " components; expected 1 or 4");
  }
  return r;
}

namespace {

// max |F(A + d lambda) - F(A)| / max |F(A)| over interior slices.
double gauge_violation(const FieldHistory<double, 4>& a, std::mt19937_64& rng) {
  const auto lam = random_history<double, 1>(a.grid(), a.size() + 2, a.spacing(), rng);
  auto shifted = a;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const auto d = four_gradient(lam, n + 1);
    auto& s = shifted.snapshots[n];
    for (std::size_t site = 0; site < a.grid().sites(); ++site) {
      for (int mu = 0; mu < 4; ++mu) s(mu, site) += kMetric[mu] * d(mu, site);
    }
  }
  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 1; n + 1 < a.size(); ++n) {
    const auto f = field_strength(a, n).data();
    const auto g = field_strength(shifted, n).data();
    scale = std::max(scale, f.max_abs());
    for (std::size_t i = 0; i < f.data().size(); ++i) worst = std::max(worst, std::abs(f.data()[i] - g.data()[i]));
  }
  return worst / scale;
}

// |(-1/4 F F) - 1/2 integral |E|^2| / (1/2 integral |E|^2) for a static A^0 = phi.
double static_sign_error(const Grid3& grid, double dt, std::mt19937_64& rng) {
  auto a = blank_history<double, 4>(grid, 3, dt);
  const auto phi = random_history<double, 1>(grid, 1, dt, rng);
  for (auto& s : a.snapshots) {
    for (std::size_t site = 0; site < grid.sites(); ++site) s(0, site) = phi.snapshots[0](0, site);
  }
  const auto e = gradient(phi.snapshots[0]);
  double e2 = 0.0;
  for (const auto& v : e.data()) e2 += v * v;
  e2 *= 0.5 * grid.cell_volume();
  const cplx kin = maxwell_density(a, 1).term("kinetic_A");
  return std::abs(kin - e2) / e2;
}

}  // namespace

RunReport cmd_lagrangian_audit(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "lagrangian-audit";
  r.columns = {"history", "split_check", "gauge_check", "kinetic_A_re", "kinetic_A_im",
               "kinetic_B_re", "kinetic_B_im", "el_residual"};
  const auto grid = c.grid.grid();
  std::mt19937_64 rng(c.seed);
  double split_worst = 0.0, gauge_worst = 0.0, el_worst = 0.0;
  for (std::size_t i = 0; i < c.histories; ++i) {
    const auto a = random_history<double, 4>(grid, c.snapshots, c.sample_dt, rng);
    const auto split = decompose(a);
    const double sc = kinetic_split_check(split);
    const double gc = gauge_violation(a, rng);
    const auto dens = split_density(split, c.snapshots / 2);

    Lattice<double, 1> init(grid);
    std::normal_distribution<double> normal;
    for (auto& v : init.data()) v = normal(rng);
    WaveState<double, 1> state(WaveSystem<double, 1>(grid, c.dynamics.mass), init,
                               c.dynamics.dt_factor * cfl_limit(grid));
    const auto wave = record_history(state, c.snapshots - 1, 1);
    const double el = euler_lagrange_residual(wave, c.dynamics.mass);

    const cplx ka = dens.term("kinetic_A");
    const cplx kb = dens.term("kinetic_B");
    r.add_row({static_cast<double>(i), sc, gc, ka.real(), ka.imag(), kb.real(), kb.imag(), el});
    split_worst = std::max(split_worst, sc);
    gauge_worst = std::max(gauge_worst, gc);
    el_worst = std::max(el_worst, el);
  }
  r.check_at_most("kinetic_split_identity", split_worst, 1e-12);
  r.check_at_most("gauge_invariance", gauge_worst, 1e-10);
  r.check_at_most("euler_lagrange_residual", el_worst, 1e-10);
  r.check_at_most("static_field_sign", static_sign_error(grid, c.sample_dt, rng), 1e-12);
  return r;
}

RunReport cmd_spinor_demo(const ScenarioConfig& c) {
  RunReport r;
  r.experiment = "spinor-demo";
  r.columns = {"level", "t", "kinetic", "coupling", "max_abs_total", "scale", "mass_term"};
  const auto grid = c.grid.grid();
  const auto& gammas = GammaSet::dirac();
  r.check_at_most("clifford_relations", gammas.clifford_residual(), 0.0);
  r.check_at_most("gamma_hermiticity", gammas.hermiticity_residual(), 0.0);

  ChargeSpec q = c.charges.front();
  q.species = Species::spinor;
  q.lambda = normalize_lambda(*q.lambda);
  const auto psi = solve_spinor_wave(q, grid, c.dynamics.steps, 1, c.dynamics.mass, c.dynamics.dt_factor);
  const auto g = g_from_psi(psi);
  const auto system = psi.system ? *psi.system : make_spinor_wave(q, grid, c.dynamics.mass, c.dynamics.dt_factor).system();
  r.check_at_most("g_divergence_residual", g_divergence_residual(psi, g, system), 1e-10);

  const double h3 = grid.cell_volume();
  double worst = 0.0;
  for (std::size_t n = 0; n < g.levels(); ++n) {
    const auto d = dirac_density(psi, g, n, gammas);
    double kin = 0.0, cpl = 0.0;
    for (double v : d.kinetic.data()) kin += v;
    for (double v : d.coupling.data()) cpl += v;
    const double total = d.total.max_abs();
    if (d.scale > 0.0) worst = std::max(worst, total / d.scale);
    r.add_row({static_cast<double>(n), psi.times[n], kin * h3, cpl * h3, total, d.scale,
               mass_term_density(psi, n, c.dynamics.mass)});
  }
  r.check_at_most("dirac_cancellation_solver", worst, 1e-12);

  std::mt19937_64 rng(c.seed);
  double random_worst = 0.0;
  for (std::size_t i = 0; i < c.histories; ++i) {
    const auto p = random_history<cplx, 4>(grid, 4, 0.25, rng);
    const auto gr = g_from_psi(p);
    for (std::size_t n = 0; n < gr.levels(); ++n) {
      const auto d = dirac_density(p, gr, n, gammas);
      random_worst = std::max(random_worst, d.total.max_abs() / d.scale);
    }
  }
  r.check_at_most("dirac_cancellation_random", random_worst, 1e-12);
  return r;
}

RunReport run_experiment(const ScenarioConfig& c, const std::filesystem::path& out_dir) {
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  const auto& e = c.experiment;
  if (e == "coulomb-check") r = cmd_coulomb_check(c);
  else if (e == "energy-scan") r = cmd_energy_scan(c);
  else if (e == "selfenergy-scan") r = cmd_selfenergy_scan(c);
  else if (e == "dispersion") r = cmd_dispersion(c);
  else if (e == "decompose") r = cmd_decompose(c, out_dir);
  else if (e == "lagrangian-audit") r = cmd_lagrangian_audit(c);
  else if (e == "spinor-demo") r = cmd_spinor_demo(c);
  else throw ConfigError("config", 0, "unknown experiment '" + e + "'");
  for (const auto& kv : c.echo) {
    if (kv.first != "seed") r.config.push_back(kv);
  }
  r.config.emplace_back("seed", std::to_string(c.seed));
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace xfl::cli
