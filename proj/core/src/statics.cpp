#include "xfl/statics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <list>
#include <memory>
#include <mutex>
#include <numbers>

#include "fft.hpp"
#include "xfl/calculus.hpp"

namespace xfl {

namespace {

constexpr double kPi = std::numbers::pi;

// Sources with at most this many nonzero sites are convolved directly.
constexpr std::size_t kDirectSumMaxSources = 64;

double inverse_distance_kernel(long dx, long dy, long dz) {
  const long m = dx * dx + dy * dy + dz * dz;
  if (m == 0) return unit_cell_inverse_distance() / (4.0 * kPi);
  return 1.0 / (4.0 * kPi * std::sqrt(static_cast<double>(m)));
}

// Spectrum of the unit-spacing, unit-eps0 kernel on a doubled grid.
class KernelCache {
 public:
  std::shared_ptr<const std::vector<cplx>> get(const Index3& padded) {
    std::lock_guard lock(mutex_);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->first == padded) {
        entries_.splice(entries_.begin(), entries_, it);
        return entries_.front().second;
      }
    }
    auto spectrum = std::make_shared<const std::vector<cplx>>(build(padded));
    entries_.emplace_front(padded, spectrum);
    if (entries_.size() > kCapacity) entries_.pop_back();
    return spectrum;
  }

 private:
  static constexpr std::size_t kCapacity = 4;

  static std::vector<cplx> build(const Index3& m) {
    std::vector<double> kernel(m[0] * m[1] * m[2]);
    auto wrap = [](std::size_t i, std::size_t n) {
      return static_cast<long>(std::min(i, n - i));
    };
    for (std::size_t k = 0; k < m[2]; ++k) {
      for (std::size_t j = 0; j < m[1]; ++j) {
        for (std::size_t i = 0; i < m[0]; ++i) {
          kernel[i + m[0] * (j + m[1] * k)] =
              inverse_distance_kernel(wrap(i, m[0]), wrap(j, m[1]), wrap(k, m[2]));
        }
      }
    }
    return fft::forward_3d(m, kernel);
  }

  std::mutex mutex_;
  std::list<std::pair<Index3, std::shared_ptr<const std::vector<cplx>>>> entries_;
};

KernelCache& kernel_cache() {
  static KernelCache cache;
  return cache;
}

ScalarLattice free_space_transform(const ScalarLattice& rho, double epsilon0) {
  const auto& g = rho.grid();
  const auto& n = g.dims();
  const Index3 m{2 * n[0], 2 * n[1], 2 * n[2]};
  std::vector<double> padded(m[0] * m[1] * m[2], 0.0);
  auto src = rho.component(0);
  for (std::size_t k = 0; k < n[2]; ++k) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t i = 0; i < n[0]; ++i) {
        padded[i + m[0] * (j + m[1] * k)] = src[g.index(i, j, k)];
      }
    }
  }
  auto spectrum = fft::forward_3d(m, padded);
  const auto kernel = kernel_cache().get(m);
  for (std::size_t n2 = 0; n2 < spectrum.size(); ++n2) spectrum[n2] *= (*kernel)[n2];
  fft::inverse_3d(m, spectrum, padded);

  const double h = g.spacing();
  const double scale = h * h / (epsilon0 * static_cast<double>(m[0] * m[1] * m[2]));
  ScalarLattice phi(g);
  auto out = phi.component(0);
  for (std::size_t k = 0; k < n[2]; ++k) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t i = 0; i < n[0]; ++i) {
        out[g.index(i, j, k)] = scale * padded[i + m[0] * (j + m[1] * k)];
      }
    }
  }
  return phi;
}

ScalarLattice free_space_direct(const ScalarLattice& rho, double epsilon0) {
  const auto& g = rho.grid();
  struct Source {
    long i, j, k;
    double q;
  };
  std::vector<Source> sources;
  auto src = rho.component(0);
  for (std::size_t site = 0; site < g.sites(); ++site) {
    if (src[site] != 0.0) {
      const auto ijk = g.unravel(site);
      sources.push_back({static_cast<long>(ijk[0]), static_cast<long>(ijk[1]),
                         static_cast<long>(ijk[2]), src[site]});
    }
  }
  const double h = g.spacing();
  const double scale = h * h / epsilon0;
  ScalarLattice phi(g);
  auto out = phi.component(0);
  const auto& n = g.dims();
  for (std::size_t k = 0; k < n[2]; ++k) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t i = 0; i < n[0]; ++i) {
        double sum = 0.0;
        for (const auto& s : sources) {
          sum += s.q * inverse_distance_kernel(static_cast<long>(i) - s.i,
                                               static_cast<long>(j) - s.j,
                                               static_cast<long>(k) - s.k);
        }
        out[g.index(i, j, k)] = scale * sum;
      }
    }
  }
  return phi;
}

ScalarLattice periodic_solve(const ScalarLattice& rho, double epsilon0) {
  const auto& g = rho.grid();
  const auto& n = g.dims();
  auto spectrum = fft::forward_3d(n, rho.component(0));
  const double h2 = g.spacing() * g.spacing();
  const std::size_t hx = n[0] / 2 + 1;
  auto sin2 = [](std::size_t m, std::size_t len) {
    const double s = std::sin(kPi * static_cast<double>(m) / static_cast<double>(len));
    return s * s;
  };
  for (std::size_t k = 0; k < n[2]; ++k) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t i = 0; i < hx; ++i) {
        const std::size_t idx = i + hx * (j + n[1] * k);
        const double symbol = 4.0 / h2 * (sin2(i, n[0]) + sin2(j, n[1]) + sin2(k, n[2]));
        spectrum[idx] = symbol == 0.0 ? cplx{} : spectrum[idx] / (epsilon0 * symbol);
      }
    }
  }
  ScalarLattice phi(g);
  fft::inverse_3d(n, spectrum, phi.component(0));
  phi *= 1.0 / static_cast<double>(g.sites());
  return phi;
}

// Transverse trapezoid weight: free-space energies integrate over the box
// spanned by the outer nodes, so face nodes carry half weight per axis.
double node_weight(const Grid3& g, int axis, std::size_t i) {
  if (g.boundary() == Boundary::periodic) return 1.0;
  return (i == 0 || i + 1 == g.dim(axis)) ? 0.5 : 1.0;
}

// sum over links of (D+ phi_a)(D+ phi_b) h^3, i.e. the field products on the
// staggered links whose adjoint is the compact Laplacian.
double link_product(const ScalarLattice& pa, const ScalarLattice& pb) {
  const auto& g = pa.grid();
  const auto& n = g.dims();
  const double h = g.spacing();
  const bool periodic = g.boundary() == Boundary::periodic;
  auto a = pa.component(0);
  auto b = pb.component(0);
  double sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? n[0] : n[0] * n[1]);
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (std::size_t site = 0; site < g.sites(); ++site) {
      const auto ijk = g.unravel(site);
      std::size_t next;
      if (ijk[axis] + 1 < n[axis]) {
        next = site + stride;
      } else if (periodic) {
        next = site - ijk[axis] * stride;
      } else {
        continue;
      }
      const double w = node_weight(g, u, ijk[u]) * node_weight(g, v, ijk[v]);
      sum += w * (a[next] - a[site]) * (b[next] - b[site]);
    }
  }
  return sum * h;  // (1/h^2) from the differences times h^3
}

// Surface integral of phi * (E . n) over the faces through the outer nodes,
// with E . n from the one-sided second-order derivative.
double surface_flux(const ScalarLattice& phi, const ScalarLattice& other) {
  const auto& g = phi.grid();
  const auto& n = g.dims();
  const double h = g.spacing();
  auto p = phi.component(0);
  auto q = other.component(0);
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? n[0] : n[0] * n[1]);
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      double face = 0.0;
      for (std::size_t v = 0; v < n[c]; ++v) {
        for (std::size_t u = 0; u < n[b]; ++u) {
          Index3 io{};
          io[axis] = side == 0 ? 0 : n[axis] - 1;
          io[b] = u;
          io[c] = v;
          const std::size_t s0 = g.index(io[0], io[1], io[2]);
          // outward derivative d(other)/dn, second order one-sided
          double dn;
          if (side == 0) {
            dn = -(-3.0 * q[s0] + 4.0 * q[s0 + stride] - q[s0 + 2 * stride]) / (2.0 * h);
          } else {
            dn = (3.0 * q[s0] - 4.0 * q[s0 - stride] + q[s0 - 2 * stride]) / (2.0 * h);
          }
          face += node_weight(g, b, u) * node_weight(g, c, v) * p[s0] * (-dn);
        }
      }
      total += face;
    }
  }
  return total * h * h;
}

void require_free_space(const Grid3& g, const char* what) {
  if (g.boundary() != Boundary::free_space) {
    throw UnsupportedError(std::string(what) + " requires a free-space grid");
  }
}

}  // namespace

double unit_cell_inverse_distance() {
  // Divergence theorem with div(x / r) = 2 / r reduces the cube integral to
  // 3 * int_{-1/2}^{1/2} asinh(1 / (2 sqrt(1/4 + z^2))) dz.
  static const double value = [] {
    auto f = [](double z) { return std::asinh(0.5 / std::sqrt(0.25 + z * z)); };
    double err = 0.0;
    const double half =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 0.5, 15, 1e-14, &err);
    return 6.0 * half;
  }();
  return value;
}

Vec3 coulomb_field_analytic(double charge, double epsilon0, const Vec3& r) {
  const double d = norm(r);
  if (d == 0.0) throw SingularityError("Coulomb field evaluated at the source point");
  return (charge / (4.0 * kPi * epsilon0 * d * d * d)) * r;
}

Vec3 force_on_charge(double q, const Vec3& field) { return q * field; }

ScalarLattice solve_poisson(const ScalarLattice& rho, double epsilon0, FreeSpaceMethod method) {
  const auto& g = rho.grid();
  g.require_solver_size();
  if (!(epsilon0 > 0.0)) throw Error("epsilon0 must be positive");
  if (g.boundary() == Boundary::periodic) return periodic_solve(rho, epsilon0);

  if (method == FreeSpaceMethod::automatic) {
    std::size_t nonzero = 0;
    for (double v : rho.component(0)) nonzero += v != 0.0 ? 1 : 0;
    method = nonzero <= kDirectSumMaxSources ? FreeSpaceMethod::direct
                                             : FreeSpaceMethod::transform;
  }
  return method == FreeSpaceMethod::direct ? free_space_direct(rho, epsilon0)
                                           : free_space_transform(rho, epsilon0);
}

Vector3Lattice electric_field(const ScalarLattice& potential) {
  auto e = gradient(potential);
  e *= -1.0;
  return e;
}

StaticField solve_static(const ScalarLattice& rho, double epsilon0, FreeSpaceMethod method) {
  auto phi = solve_poisson(rho, epsilon0, method);
  auto e = electric_field(phi);
  return {std::move(phi), std::move(e)};
}

StaticField solve_charge(const Grid3& grid, const ChargeSpec& charge, double epsilon0,
                         FreeSpaceMethod method) {
  return solve_static(deposit_charge(grid, charge), epsilon0, method);
}

double field_energy(const Vector3Lattice& field, double epsilon0) {
  return 0.5 * interaction_energy(field, field, epsilon0);
}

double field_energy(const StaticField& f, double epsilon0) {
  return 0.5 * interaction_energy(f, f, epsilon0);
}

double interaction_energy(const Vector3Lattice& a, const Vector3Lattice& b, double epsilon0) {
  require_same_grid(a.grid(), b.grid(), "interaction_energy");
  double sum = 0.0;
  for (std::size_t site = 0; site < a.sites(); ++site) {
    sum += a(0, site) * b(0, site) + a(1, site) * b(1, site) + a(2, site) * b(2, site);
  }
  return epsilon0 * sum * a.grid().cell_volume();
}

double exterior_interaction(const StaticField& a, const StaticField& b, double epsilon0) {
  require_same_grid(a.potential.grid(), b.potential.grid(), "exterior_interaction");
  if (a.potential.grid().boundary() != Boundary::free_space) return 0.0;
  const double ab = surface_flux(a.potential, b.potential);
  const double ba = surface_flux(b.potential, a.potential);
  return 0.5 * epsilon0 * (ab + ba);
}

double interaction_energy(const StaticField& a, const StaticField& b, double epsilon0) {
  require_same_grid(a.potential.grid(), b.potential.grid(), "interaction_energy");
  return epsilon0 * link_product(a.potential, b.potential) + exterior_interaction(a, b, epsilon0);
}

double self_energy(const ChargeSpec& charge, const Grid3& grid, double epsilon0) {
  if (charge.value == 0.0) return 0.0;
  return field_energy(solve_charge(grid, charge, epsilon0), epsilon0);
}

nlohmann::json EnergyReport::to_json() const {
  return {
      {"total_W", total_W},
      {"self_terms", self_terms},
      {"interaction_term", interaction_term},
      {"grid", {{"dims", dims}, {"h", grid_spacing}, {"boundary", std::string(to_string(boundary))}}},
      {"epsilon0", epsilon0},
  };
}

EnergyReport energy_report(const ChargeScenario& scenario) {
  scenario.validate();
  const double eps0 = scenario.epsilon0;
  std::vector<StaticField> fields;
  fields.reserve(scenario.charges.size());
  for (const auto& q : scenario.charges) fields.push_back(solve_charge(scenario.grid, q, eps0));

  EnergyReport report;
  report.grid_spacing = scenario.grid.spacing();
  report.dims = scenario.grid.dims();
  report.boundary = scenario.grid.boundary();
  report.epsilon0 = eps0;
  for (const auto& f : fields) report.self_terms.push_back(field_energy(f, eps0));
  for (std::size_t a = 0; a < fields.size(); ++a) {
    for (std::size_t b = a + 1; b < fields.size(); ++b) {
      report.interaction_term += interaction_energy(fields[a], fields[b], eps0);
    }
  }
  StaticField total = fields.front();
  for (std::size_t a = 1; a < fields.size(); ++a) total += fields[a];
  report.total_W = field_energy(total, eps0);
  return report;
}

double energy_derivative(const ChargeScenario& scenario, std::size_t which, int axis, double dR,
                         EnergyFunctional functional) {
  scenario.validate();
  const auto& g = scenario.grid;
  require_free_space(g, "energy-gradient force");
  if (which >= scenario.charges.size()) throw Error("charge index out of range");
  const double h = g.spacing();
  if (dR < 0.25 * h || dR > 2.0 * h) throw Error("dR must lie in [h/4, 2h]");
  const double eps0 = scenario.epsilon0;

  ScalarLattice rho_others(g);
  bool have_others = false;
  for (std::size_t n = 0; n < scenario.charges.size(); ++n) {
    if (n == which) continue;
    deposit_point(rho_others, scenario.charges[n].position, scenario.charges[n].value);
    have_others = true;
  }
  if (!have_others && functional == EnergyFunctional::interaction) return 0.0;
  const StaticField others = solve_static(rho_others, eps0);

  auto energy_at = [&](double shift) {
    ChargeSpec moved = scenario.charges[which];
    moved.position[axis] += shift;
    const StaticField mine = solve_charge(g, moved, eps0);
    if (functional == EnergyFunctional::interaction) {
      return interaction_energy(mine, others, eps0);
    }
    return field_energy(mine + others, eps0);
  };
  return (energy_at(dR) - energy_at(-dR)) / (2.0 * dR);
}

namespace {

Vec3 negative_gradient(const ChargeScenario& scenario, std::size_t which, double dR,
                       EnergyFunctional functional) {
  if (dR <= 0.0) dR = 0.5 * scenario.grid.spacing();
  Vec3 f{};
  for (int axis = 0; axis < 3; ++axis) {
    f[axis] = -energy_derivative(scenario, which, axis, dR, functional);
  }
  return f;
}

}  // namespace

Vec3 force_from_energy_gradient(const ChargeScenario& scenario, std::size_t which, double dR) {
  return negative_gradient(scenario, which, dR, EnergyFunctional::interaction);
}

Vec3 force_from_total_energy_gradient(const ChargeScenario& scenario, std::size_t which,
                                      double dR) {
  return negative_gradient(scenario, which, dR, EnergyFunctional::total);
}

}  // namespace xfl
