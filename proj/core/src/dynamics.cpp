#include "xfl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <nlohmann/json.hpp>

#include "xfl/field_io.hpp"

namespace xfl {

namespace {

// out += lap(in) with wrapped neighbours (periodic) or zero neighbours outside
// the node range (free space; ghost values are added separately).
template <class T>
void add_laplacian(const Grid3& g, const T* in, T* out) {
  const auto [nx, ny, nz] = g.dims();
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  const bool periodic = g.boundary() == Boundary::periodic;
  const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(nx);
  const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(nx * ny);
  const auto knz = static_cast<std::ptrdiff_t>(nz);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < knz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i) + sy * static_cast<std::ptrdiff_t>(j) +
                                 sz * k;
        T acc = -6.0 * in[s];
        auto neighbour = [&](std::size_t c, std::size_t n, std::ptrdiff_t stride) {
          if (c > 0) {
            acc += in[s - stride];
          } else if (periodic) {
            acc += in[s + stride * static_cast<std::ptrdiff_t>(n - 1)];
          }
          if (c + 1 < n) {
            acc += in[s + stride];
          } else if (periodic) {
            acc += in[s - stride * static_cast<std::ptrdiff_t>(n - 1)];
          }
        };
        neighbour(i, nx, 1);
        neighbour(j, ny, sy);
        neighbour(static_cast<std::size_t>(k), nz, sz);
        out[s] += acc * invh2;
      }
    }
  }
}

template <class T>
T conj_mul(const T& a, const T& b) {
  if constexpr (is_complex_v<T>) {
    return std::conj(a) * b;
  } else {
    return a * b;
  }
}

template <class T>
double real_part(const T& v) {
  if constexpr (is_complex_v<T>) {
    return v.real();
  } else {
    return v;
  }
}

// Lowest frequency of the source-free box operator (excluding the periodic
// k = 0 mode when massless).
double slowest_frequency(const Grid3& g, double mass) {
  double k2 = 0.0;
  if (g.boundary() == Boundary::periodic) {
    double lmax = 0.0;
    for (int a = 0; a < 3; ++a) lmax = std::max(lmax, static_cast<double>(g.dim(a)));
    const double k = 2.0 * std::numbers::pi / (lmax * g.spacing());
    k2 = k * k;
  } else {
    for (int a = 0; a < 3; ++a) {
      const double k = std::numbers::pi / ((static_cast<double>(g.dim(a)) + 1.0) * g.spacing());
      k2 += k * k;
    }
  }
  return std::sqrt(k2 + mass * mass);
}

}  // namespace

double cfl_limit(const Grid3& grid) { return grid.spacing() / std::sqrt(3.0); }

template <class T, std::size_t N>
PointSource<T, N> point_source(const ChargeSpec& charge) {
  charge.validate();
  PointSource<T, N> src;
  src.position = charge.position;
  src.velocity = charge.velocity;
  const double e = charge.value;
  const double dtau = lorentz_density_factor(charge.velocity);
  const auto mismatch = [&](const char* shape) {
    return UnsupportedError(std::string("a ") + std::string(to_string(charge.species)) +
                            " charge cannot source a " + shape + " field");
  };
  if constexpr (N == 1) {
    if (charge.species == Species::electric) {
      src.coupling[0] = e;
    } else if (charge.species == Species::scalar) {
      src.coupling[0] = e * dtau;
    } else {
      throw mismatch("scalar");
    }
  } else if constexpr (N == 4 && !is_complex_v<T>) {
    if (charge.species != Species::electric && charge.species != Species::vector) {
      throw mismatch("four-vector");
    }
    const double gamma = 1.0 / dtau;
    src.coupling = {e * gamma, e * gamma * charge.velocity[0], e * gamma * charge.velocity[1],
                    e * gamma * charge.velocity[2]};
  } else if constexpr (N == 4) {
    if (charge.species != Species::spinor) throw mismatch("spinor");
    for (std::size_t a = 0; a < 4; ++a) src.coupling[a] = (*charge.lambda)[a] * (e * dtau);
  } else {
    throw mismatch("multi-component");
  }
  return src;
}

template <class T, std::size_t N>
WaveSystem<T, N>::WaveSystem(Grid3 grid, double mass, std::vector<PointSource<T, N>> sources,
                             std::string species)
    : grid_(std::move(grid)), mass_(mass), sources_(std::move(sources)), species_(std::move(species)) {
  grid_.require_solver_size();
  if (!(mass_ >= 0.0) || !std::isfinite(mass_)) throw Error("mass must be a nonnegative number");
  for (const auto& s : sources_) {
    lorentz_density_factor(s.velocity);
    if (!grid_.contains(s.position)) throw OutOfBoundsError("wave source lies outside the grid");
  }
}

template <class T, std::size_t N>
WaveSystem<T, N> WaveSystem<T, N>::from_scenario(const ChargeScenario& scenario, double mass) {
  scenario.validate();
  std::vector<PointSource<T, N>> sources;
  sources.reserve(scenario.charges.size());
  for (const auto& c : scenario.charges) sources.push_back(point_source<T, N>(c));
  return WaveSystem(scenario.grid, mass, std::move(sources),
                    std::string(to_string(scenario.charges.front().species)));
}

template <class T, std::size_t N>
Lattice<T, N> WaveSystem<T, N>::source_density(double t) const {
  Lattice<T, N> s(grid_);
  const double inv_vol = 1.0 / grid_.cell_volume();
  std::array<T, N> total{};
  for (const auto& src : sources_) {
    for_each_deposition_node(grid_, src.position + t * src.velocity, Deposition::cloud_in_cell,
                             [&](std::size_t site, double w) {
                               for (std::size_t c = 0; c < N; ++c) {
                                 s(c, site) += src.coupling[c] * (w * inv_vol);
                               }
                             });
    for (std::size_t c = 0; c < N; ++c) total[c] += src.coupling[c];
  }
  if (grid_.boundary() == Boundary::periodic && !sources_.empty()) {
    const double volume = static_cast<double>(grid_.sites()) * grid_.cell_volume();
    for (std::size_t c = 0; c < N; ++c) {
      const T background = total[c] / volume;
      for (auto& v : s.component(c)) v -= background;
    }
  }
  return s;
}

template <class T, std::size_t N>
void WaveSystem<T, N>::apply(const Lattice<T, N>& field, double t, Lattice<T, N>& out) const {
  require_same_grid(grid_, field.grid(), "wave operator");
  require_same_grid(grid_, out.grid(), "wave operator output");
  const double m2 = mass_ * mass_;
  for (std::size_t c = 0; c < N; ++c) {
    auto o = out.component(c);
    auto f = field.component(c);
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = -m2 * f[n];
    add_laplacian(grid_, f.data(), o.data());
  }
  if (sources_.empty()) return;
  out += source_density(t);
  if (grid_.boundary() != Boundary::free_space) return;

  // Dirichlet ghosts: static far field of the sources at time t.
  std::vector<Vec3> where;
  where.reserve(sources_.size());
  for (const auto& src : sources_) where.push_back(src.position + t * src.velocity);
  const double invh2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const double h = grid_.spacing();
  const auto& d = grid_.dims();
  auto add_ghost = [&](std::size_t site, const Vec3& ghost) {
    std::array<T, N> g{};
    for (std::size_t q = 0; q < sources_.size(); ++q) {
      const double r = norm(ghost - where[q]);
      const double green = std::exp(-mass_ * r) / (4.0 * std::numbers::pi * r);
      for (std::size_t c = 0; c < N; ++c) g[c] += sources_[q].coupling[c] * green;
    }
    for (std::size_t c = 0; c < N; ++c) out(c, site) += g[c] * invh2;
  };
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int e = (a + 2) % 3;
    for (std::size_t v = 0; v < d[e]; ++v) {
      for (std::size_t u = 0; u < d[b]; ++u) {
        for (const std::size_t face : {std::size_t{0}, d[a] - 1}) {
          Index3 ijk{};
          ijk[a] = face;
          ijk[b] = u;
          ijk[e] = v;
          const std::size_t site = grid_.index(ijk[0], ijk[1], ijk[2]);
          Vec3 ghost = grid_.position(site);
          ghost[a] += face == 0 ? -h : h;
          add_ghost(site, ghost);
        }
      }
    }
  }
}

template <class T, std::size_t N>
Lattice<T, N> WaveSystem<T, N>::apply(const Lattice<T, N>& field, double t) const {
  Lattice<T, N> out(grid_);
  apply(field, t, out);
  return out;
}

template <class T, std::size_t N>
double WaveSystem<T, N>::energy_form(const Lattice<T, N>& a, const Lattice<T, N>& b) const {
  require_same_grid(grid_, a.grid(), "energy form");
  require_same_grid(grid_, b.grid(), "energy form");
  const double m2 = mass_ * mass_;
  double sum = 0.0;
  std::vector<T> kb(grid_.sites());
  for (std::size_t c = 0; c < N; ++c) {
    auto bc = b.component(c);
    for (std::size_t n = 0; n < kb.size(); ++n) kb[n] = T{};
    add_laplacian(grid_, bc.data(), kb.data());
    auto ac = a.component(c);
    for (std::size_t n = 0; n < kb.size(); ++n) {
      sum += real_part(conj_mul(ac[n], m2 * bc[n] - kb[n]));
    }
  }
  return sum * grid_.cell_volume();
}

template <class T, std::size_t N>
WaveState<T, N>::WaveState(WaveSystem<T, N> system, Lattice<T, N> field, double dt,
                           std::optional<Lattice<T, N>> previous, double t)
    : system_(std::move(system)),
      field_(std::move(field)),
      prev_(previous ? std::move(*previous) : field_),
      dt_(dt),
      t_(t),
      scratch_(system_.grid()) {
  require_same_grid(system_.grid(), field_.grid(), "wave state field");
  require_same_grid(system_.grid(), prev_.grid(), "wave state previous field");
  const double limit = kCflFactorMax * cfl_limit(system_.grid());
  if (!(std::abs(dt_) > 0.0) || std::abs(dt_) > limit * (1.0 + 1e-12)) {
    throw GeometryError("time step " + std::to_string(dt_) + " violates the CFL bound 0.9 h/sqrt(3) = " +
                        std::to_string(limit));
  }
  const double h = system_.grid().spacing();
  const double m = system_.mass();
  if ((12.0 / (h * h) + m * m) * dt_ * dt_ >= 4.0) {
    throw GeometryError("mass term makes the leapfrog step unstable (m dt too large)");
  }
}

template <class T, std::size_t N>
void WaveState<T, N>::step(double damping) {
  if (damping < 0.0 || !std::isfinite(damping)) throw Error("damping must be nonnegative");
  if (damping > 0.0 && dt_ < 0.0) throw Error("damped stepping requires a forward time step");
  system_.apply(field_, t_, scratch_);
  const double dt2 = dt_ * dt_;
  auto next = prev_.data();
  auto cur = field_.data();
  auto rhs = scratch_.data();
  const auto total = static_cast<std::ptrdiff_t>(next.size());
  if (damping == 0.0) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < total; ++n) next[n] = 2.0 * cur[n] - next[n] + dt2 * rhs[n];
  } else {
    const double half = 0.5 * damping * dt_;
    const double a = (1.0 - half) / (1.0 + half);
    const double b = dt2 / (1.0 + half);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < total; ++n) {
      next[n] = cur[n] + a * (cur[n] - next[n]) + b * rhs[n];
    }
  }
  std::swap(field_, prev_);
  t_ += dt_;
  ++steps_;
  if (!field_.all_finite()) {
    throw InstabilityError("non-finite field value at step " + std::to_string(steps_) +
                           " (t = " + std::to_string(t_) + ")");
  }
}

template <class T, std::size_t N>
void WaveState<T, N>::reverse() {
  std::swap(field_, prev_);
  t_ -= dt_;
  dt_ = -dt_;
}

template <class T, std::size_t N>
double WaveState<T, N>::max_velocity() const {
  double m = 0.0;
  auto a = field_.data();
  auto b = prev_.data();
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, static_cast<double>(std::abs(a[n] - b[n])));
  return m / std::abs(dt_);
}

template <class T, std::size_t N>
double WaveState<T, N>::discrete_energy() const {
  double kinetic = 0.0;
  auto a = field_.data();
  auto b = prev_.data();
  for (std::size_t n = 0; n < a.size(); ++n) {
    const T v = a[n] - b[n];
    kinetic += real_part(conj_mul(v, v));
  }
  kinetic *= system_.grid().cell_volume() / (dt_ * dt_);
  return 0.5 * kinetic + 0.5 * system_.energy_form(field_, prev_);
}

ScalarWave step_scalar_wave(ScalarWave state) {
  state.step();
  return state;
}

VectorWave step_vector_wave(VectorWave state) {
  state.step();
  return state;
}

template <class T, std::size_t N>
std::size_t relax_to_static(WaveState<T, N>& state, const RelaxationOptions& options) {
  const double dt = state.dt();
  if (dt <= 0.0) throw Error("relaxation requires a forward time step");
  const double floor = 2.0 * slowest_frequency(state.system().grid(), state.mass());
  double gamma = std::max(options.initial_damping_dt / dt, floor);
  constexpr int kQuietSteps = 3;
  int quiet = 0;
  for (std::size_t n = 0; n < options.max_steps; ++n) {
    state.step(gamma);
    gamma = std::max(floor, gamma * options.ramp);
    quiet = state.max_velocity() < options.tolerance ? quiet + 1 : 0;
    if (quiet >= kQuietSteps) return n + 1;
  }
  throw SamplingError("relaxation did not reach |d_t phi| < " + std::to_string(options.tolerance) +
                      " within " + std::to_string(options.max_steps) + " steps");
}

template <class T, std::size_t N>
void FieldHistory<T, N>::require_uniform() const {
  if (times.size() != snapshots.size()) throw FormatError("history times and snapshots differ in count");
  if (snapshots.empty()) throw FormatError("empty field history");
  for (const auto& s : snapshots) {
    if (!(s.grid() == snapshots.front().grid())) throw FormatError("history snapshots use different grids");
  }
  if (times.size() < 2) return;
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw FormatError("history times must increase");
  for (std::size_t n = 1; n < times.size(); ++n) {
    const double expect = times[0] + static_cast<double>(n) * dt;
    if (std::abs(times[n] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
      throw FormatError("history snapshot " + std::to_string(n) + " breaks the uniform spacing");
    }
  }
}

template <class T, std::size_t N>
FieldHistory<T, N> record_history(WaveState<T, N> initial, std::size_t steps, std::size_t stride) {
  if (stride == 0) throw Error("history stride must be positive");
  FieldHistory<T, N> h;
  h.stride = stride;
  h.step_dt = initial.dt();
  h.system = initial.system();
  h.species = initial.system().species();
  const double t0 = initial.t();
  h.times.push_back(t0);
  h.snapshots.push_back(initial.field());
  for (std::size_t n = 1; n <= steps; ++n) {
    initial.step();
    if (n % stride == 0) {
      h.times.push_back(t0 + static_cast<double>(n) * initial.dt());
      h.snapshots.push_back(initial.field());
    }
  }
  return h;
}

double measure_dispersion(const Grid3& grid, const Vec3& k, double mass, std::size_t steps,
                          double dt_factor) {
  if (grid.boundary() != Boundary::periodic) {
    throw UnsupportedError("dispersion measurement needs a periodic grid");
  }
  for (int a = 0; a < 3; ++a) {
    const double modes = k[a] * static_cast<double>(grid.dim(a)) * grid.spacing() / (2.0 * std::numbers::pi);
    if (std::abs(modes - std::round(modes)) > 1e-6) {
      throw GeometryError("wave vector component " + std::to_string(a) +
                          " is not commensurate with the periodic box");
    }
  }
  if (!(dt_factor > 0.0) || dt_factor > kCflFactorMax) throw GeometryError("dt factor must lie in (0, 0.9]");
  const double dt = dt_factor * cfl_limit(grid);

  WaveSystem<double, 1> system(grid, mass);
  ScalarLattice phi(grid);
  const Vec3 o = grid.origin();
  for (std::size_t s = 0; s < grid.sites(); ++s) phi(0, s) = std::cos(dot(k, grid.position(s) - o));
  // Symmetric start phi(-dt) = phi(dt): zero initial velocity to second order.
  ScalarLattice prev = phi;
  const ScalarLattice acc = system.apply(phi, 0.0);
  for (std::size_t s = 0; s < grid.sites(); ++s) prev(0, s) += 0.5 * dt * dt * acc(0, s);
  ScalarWave state(system, phi, dt, prev);

  std::vector<double> crossings;
  double last = state.field()(0, 0);
  for (std::size_t n = 1; n <= steps; ++n) {
    state.step();
    const double now = state.field()(0, 0);
    if ((last > 0.0 && now <= 0.0) || (last < 0.0 && now >= 0.0)) {
      const double frac = last / (last - now);
      crossings.push_back((static_cast<double>(n) - 1.0 + frac) * dt);
    }
    last = now;
  }
  if (crossings.size() < 8) {
    throw SamplingError("only " + std::to_string(crossings.size()) +
                        " zero crossings recorded; at least 4 periods (8 crossings) are needed");
  }
  const double span = crossings.back() - crossings.front();
  return std::numbers::pi * static_cast<double>(crossings.size() - 1) / span;
}

namespace {

template <class T>
nlohmann::json value_json(const T& v) {
  if constexpr (is_complex_v<T>) {
    return nlohmann::json::array({v.real(), v.imag()});
  } else {
    return v;
  }
}

template <class T>
T value_from_json(const nlohmann::json& j) {
  if constexpr (is_complex_v<T>) {
    return T(j.at(0).get<double>(), j.at(1).get<double>());
  } else {
    return j.get<double>();
  }
}

}  // namespace

template <class T, std::size_t N>
void save_history(const std::filesystem::path& stem, const FieldHistory<T, N>& history) {
  history.require_uniform();
  auto data_path = stem;
  data_path += ".xfl";
  auto index_path = stem;
  index_path += ".json";
  {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + data_path.string() + " for writing");
    for (const auto& s : history.snapshots) save_lattice(out, s);
    if (!out) throw FormatError("failed writing " + data_path.string());
  }
  nlohmann::json j;
  j["dt"] = history.spacing();
  j["stride"] = history.stride;
  j["steps"] = (history.size() - 1) * history.stride;
  j["step_dt"] = history.step_dt;
  j["mass"] = history.system ? history.system->mass() : 0.0;
  j["species"] = history.species;
  j["t0"] = history.times.front();
  j["snapshots"] = history.size();
  j["origin"] = history.grid().origin();
  j["components"] = N;
  j["complex"] = is_complex_v<T>;
  if (history.system) {
    auto sources = nlohmann::json::array();
    for (const auto& s : history.system->sources()) {
      nlohmann::json src;
      src["position"] = s.position;
      src["velocity"] = s.velocity;
      auto coupling = nlohmann::json::array();
      for (const auto& c : s.coupling) coupling.push_back(value_json(c));
      src["coupling"] = coupling;
      sources.push_back(src);
    }
    j["sources"] = sources;
  }
  std::ofstream idx(index_path);
  if (!idx) throw FormatError("cannot open " + index_path.string() + " for writing");
  idx << j.dump(2) << '\n';
}

template <class T, std::size_t N>
FieldHistory<T, N> load_history(const std::filesystem::path& stem) {
  auto data_path = stem;
  data_path += ".xfl";
  auto index_path = stem;
  index_path += ".json";
  std::ifstream idx(index_path);
  if (!idx) throw FormatError("cannot open " + index_path.string());
  nlohmann::json j;
  try {
    idx >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed history index " + index_path.string() + ": " + e.what());
  }
  FieldHistory<T, N> h;
  try {
    if (j.at("components").get<std::size_t>() != N || j.at("complex").get<bool>() != is_complex_v<T>) {
      throw FormatError("history " + stem.string() + " holds a different field shape");
    }
    const double dt = j.at("dt").get<double>();
    const double t0 = j.at("t0").get<double>();
    const auto count = j.at("snapshots").get<std::size_t>();
    const Vec3 origin = j.at("origin").get<Vec3>();
    h.stride = j.at("stride").get<std::size_t>();
    h.step_dt = j.at("step_dt").get<double>();
    h.species = j.at("species").get<std::string>();
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + data_path.string());
    for (std::size_t n = 0; n < count; ++n) {
      auto rec = read_record(in);
      const Grid3 g(rec.dims, rec.spacing, origin, rec.boundary);
      auto f = from_record<T, N>(rec);
      Lattice<T, N> placed(g);
      std::copy(f.data().begin(), f.data().end(), placed.data().begin());
      h.snapshots.push_back(std::move(placed));
      h.times.push_back(t0 + static_cast<double>(n) * dt);
    }
    if (j.contains("sources")) {
      std::vector<PointSource<T, N>> sources;
      for (const auto& s : j.at("sources")) {
        PointSource<T, N> src;
        src.position = s.at("position").get<Vec3>();
        src.velocity = s.at("velocity").get<Vec3>();
        const auto& c = s.at("coupling");
        if (c.size() != N) throw FormatError("source coupling has the wrong component count");
        for (std::size_t a = 0; a < N; ++a) src.coupling[a] = value_from_json<T>(c.at(a));
        sources.push_back(src);
      }
      h.system.emplace(h.grid(), j.at("mass").get<double>(), std::move(sources), h.species);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed history index " + index_path.string() + ": " + e.what());
  }
  h.require_uniform();
  return h;
}

#define XFL_INSTANTIATE_DYNAMICS(T, N)                                                          \
  template PointSource<T, N> point_source<T, N>(const ChargeSpec&);                             \
  template class WaveSystem<T, N>;                                                              \
  template class WaveState<T, N>;                                                               \
  template struct FieldHistory<T, N>;                                                           \
  template std::size_t relax_to_static<T, N>(WaveState<T, N>&, const RelaxationOptions&);       \
  template FieldHistory<T, N> record_history<T, N>(WaveState<T, N>, std::size_t, std::size_t);  \
  template void save_history<T, N>(const std::filesystem::path&, const FieldHistory<T, N>&);    \
  template FieldHistory<T, N> load_history<T, N>(const std::filesystem::path&);

XFL_INSTANTIATE_DYNAMICS(double, 1)
XFL_INSTANTIATE_DYNAMICS(cplx, 1)
XFL_INSTANTIATE_DYNAMICS(double, 4)
XFL_INSTANTIATE_DYNAMICS(cplx, 4)

#undef XFL_INSTANTIATE_DYNAMICS

}  // namespace xfl
