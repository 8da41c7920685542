#include "xfl/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "xfl/calculus.hpp"

namespace xfl {

template <class T>
std::size_t FieldStrength<T>::slot(int mu, int nu) {
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {-1, -1, 3, 4}, {-1, -1, -1, 5}, {-1, -1, -1, -1}};
  return static_cast<std::size_t>(table[mu][nu]);
}

template <class T>
T FieldStrength<T>::lower(int mu, int nu, std::size_t site) const {
  if (mu == nu) return T{};
  if (mu < nu) return data_(slot(mu, nu), site);
  return -data_(slot(nu, mu), site);
}

template <class T>
T FieldStrength<T>::upper(int mu, int nu, std::size_t site) const {
  return kMetric[mu] * kMetric[nu] * lower(mu, nu, site);
}

template <class T>
std::span<T> FieldStrength<T>::pair(int mu, int nu) {
  return data_.component(slot(mu, nu));
}

template <class T>
std::span<const T> FieldStrength<T>::pair(int mu, int nu) const {
  return data_.component(slot(mu, nu));
}

namespace {

template <class T, std::size_t N>
void require_slice(const FieldHistory<T, N>& h, std::size_t slice) {
  if (h.size() < 3) {
    throw SamplingError("time derivatives need at least 3 snapshots, got " + std::to_string(h.size()));
  }
  h.require_uniform();
  if (slice < 1 || slice + 1 >= h.size()) {
    throw Error("slice " + std::to_string(slice) + " has no neighbours on both sides");
  }
}

// d_mu f (lower index) for one component at `slice`, into out[mu].
template <class T, std::size_t N>
void derivatives(const FieldHistory<T, N>& h, std::size_t slice, std::size_t c, double sign,
                 std::array<std::vector<T>, 4>& out) {
  const Grid3& g = h.grid();
  const std::size_t sites = g.sites();
  const double inv2dt = 0.5 / h.spacing();
  auto next = h.snapshots[slice + 1].component(c);
  auto prev = h.snapshots[slice - 1].component(c);
  auto now = h.snapshots[slice].component(c);
  for (auto& v : out) v.assign(sites, T{});
  for (std::size_t s = 0; s < sites; ++s) out[0][s] = sign * (next[s] - prev[s]) * inv2dt;
  std::vector<T> scaled(now.begin(), now.end());
  for (auto& v : scaled) v *= sign;
  for (int a = 0; a < 3; ++a) {
    central_difference<T>(g, a, std::span<const T>(scaled), std::span<T>(out[a + 1]));
  }
}

template <class T>
T sample(std::span<const T> f, const Grid3& g, const Vec3& x) {
  T acc{};
  for_each_deposition_node(g, x, Deposition::cloud_in_cell,
                           [&](std::size_t site, double w) { acc += w * f[site]; });
  return acc;
}

template <class T>
T integrate_all(const Lattice<T, 1>& f) {
  return integrate<T>(f.grid(), f.component(0));
}

template <class T>
cplx as_cplx(const T& v) {
  return cplx(v);
}

template <class T>
cplx four_vector_coupling(const Lattice<T, 4>& a, double t, const ChargeScenario& current) {
  cplx acc{};
  for (const auto& q : current.charges) {
    const auto src = point_source<double, 4>(q);
    const Vec3 x = q.position_at(t);
    for (std::size_t mu = 0; mu < 4; ++mu) {
      acc -= src.coupling[mu] * kMetric[mu] * as_cplx(sample<T>(a.component(mu), a.grid(), x));
    }
  }
  return acc;
}

template <class T>
cplx scalar_coupling(const Lattice<T, 1>& phi, double t, const ChargeScenario& current) {
  cplx acc{};
  for (const auto& q : current.charges) {
    const auto src = point_source<double, 1>(q);
    acc += src.coupling[0] * as_cplx(sample<T>(phi.component(0), phi.grid(), q.position_at(t)));
  }
  return acc;
}

template <class T, std::size_t N>
LagrangianReport report_for(const FieldHistory<T, N>& h, std::size_t slice, std::string density) {
  LagrangianReport r;
  r.density = std::move(density);
  r.time = h.times[slice];
  r.dt = h.spacing();
  r.spacing = h.grid().spacing();
  r.dims = h.grid().dims();
  r.boundary = h.grid().boundary();
  return r;
}

template <class T>
cplx maxwell_kinetic(const FieldStrength<T>& f) {
  auto ff = contract(f, f);
  return as_cplx(T(-0.25) * integrate_all(ff));
}

template <class T>
cplx scalar_kinetic(const FourGradient<T>& d) {
  auto dd = contract(d, d);
  return as_cplx(T(0.5) * integrate_all(dd));
}

template <class T>
cplx mass_integral(const Lattice<T, 1>& phi, double mass) {
  T acc{};
  for (const auto& v : phi.component(0)) acc += v * v;
  return as_cplx(acc * (0.5 * mass * mass * phi.grid().cell_volume()));
}

}  // namespace

template <class T>
FieldStrength<T> field_strength(const FieldHistory<T, 4>& history, std::size_t slice) {
  require_slice(history, slice);
  FieldStrength<T> f(history.grid());
  std::array<std::array<std::vector<T>, 4>, 4> d;  // d[nu][mu] = d_mu A_nu
  for (std::size_t nu = 0; nu < 4; ++nu) derivatives(history, slice, nu, kMetric[nu], d[nu]);
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu + 1; nu < 4; ++nu) {
      auto out = f.pair(mu, nu);
      for (std::size_t s = 0; s < out.size(); ++s) out[s] = d[nu][mu][s] - d[mu][nu][s];
    }
  }
  return f;
}

template <class T>
FourGradient<T> four_gradient(const FieldHistory<T, 1>& history, std::size_t slice) {
  require_slice(history, slice);
  std::array<std::vector<T>, 4> d;
  derivatives(history, slice, 0, 1.0, d);
  FourGradient<T> out(history.grid());
  for (std::size_t mu = 0; mu < 4; ++mu) std::copy(d[mu].begin(), d[mu].end(), out.component(mu).begin());
  return out;
}

template <class T>
Lattice<T, 1> contract(const FieldStrength<T>& a, const FieldStrength<T>& b) {
  require_same_grid(a.grid(), b.grid(), "field strength contraction");
  Lattice<T, 1> out(a.grid());
  auto o = out.component(0);
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu + 1; nu < 4; ++nu) {
      const double w = 2.0 * kMetric[mu] * kMetric[nu];
      auto x = a.pair(mu, nu);
      auto y = b.pair(mu, nu);
      for (std::size_t s = 0; s < o.size(); ++s) o[s] += w * x[s] * y[s];
    }
  }
  return out;
}

template <class T>
Lattice<T, 1> contract(const FourGradient<T>& a, const FourGradient<T>& b) {
  require_same_grid(a.grid(), b.grid(), "four-gradient contraction");
  Lattice<T, 1> out(a.grid());
  auto o = out.component(0);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    auto x = a.component(mu);
    auto y = b.component(mu);
    for (std::size_t s = 0; s < o.size(); ++s) o[s] += kMetric[mu] * x[s] * y[s];
  }
  return out;
}

cplx LagrangianReport::term(std::string_view name) const {
  for (std::size_t n = 0; n < kTermNames.size(); ++n) {
    if (kTermNames[n] == name) return terms[n];
  }
  throw Error("unknown Lagrangian term '" + std::string(name) + "'");
}

cplx& LagrangianReport::term(std::string_view name) {
  for (std::size_t n = 0; n < kTermNames.size(); ++n) {
    if (kTermNames[n] == name) return terms[n];
  }
  throw Error("unknown Lagrangian term '" + std::string(name) + "'");
}

void LagrangianReport::finalize() {
  total = {};
  double scale = 0.0;
  double imag = 0.0;
  for (const auto& t : terms) {
    total += t;
    scale = std::max(scale, std::abs(t));
    imag = std::max(imag, std::abs(t.imag()));
  }
  complex_valued = imag > 1e-12 * std::max(scale, 1e-300);
}

nlohmann::json LagrangianReport::to_json() const {
  nlohmann::json j;
  j["density"] = density;
  nlohmann::json t;
  for (std::size_t n = 0; n < kTermNames.size(); ++n) {
    const std::string name(kTermNames[n]);
    t[name] = complex_valued ? nlohmann::json::array({terms[n].real(), terms[n].imag()})
                             : nlohmann::json(terms[n].real());
  }
  j["terms"] = t;
  j["total"] = complex_valued ? nlohmann::json::array({total.real(), total.imag()})
                              : nlohmann::json(total.real());
  j["complex_valued"] = complex_valued;
  j["metadata"] = {{"time", time},       {"dt", dt},
                   {"spacing", spacing}, {"dims", dims},
                   {"boundary", std::string(to_string(boundary))}};
  return j;
}

std::string LagrangianReport::csv_header() {
  std::string h = "density,time";
  for (const auto& n : kTermNames) {
    h += ',';
    h += n;
    h += "_re,";
    h += n;
    h += "_im";
  }
  h += ",total_re,total_im,complex_valued";
  return h;
}

std::string LagrangianReport::csv_row() const {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string r = density + "," + num(time);
  for (const auto& t : terms) r += "," + num(t.real()) + "," + num(t.imag());
  r += "," + num(total.real()) + "," + num(total.imag()) + (complex_valued ? ",1" : ",0");
  return r;
}

template <class T>
LagrangianReport maxwell_density(const FieldHistory<T, 4>& history, std::size_t slice,
                                 const std::optional<ChargeScenario>& source) {
  const auto f = field_strength(history, slice);
  auto r = report_for(history, slice, "maxwell");
  r.term("kinetic_A") = maxwell_kinetic(f);
  if (source) r.term("source_coupling") = four_vector_coupling(history.snapshots[slice], r.time, *source);
  r.finalize();
  return r;
}

template <class T>
LagrangianReport scalar_density(const FieldHistory<T, 1>& history, std::size_t slice, double mass,
                                const std::optional<ChargeScenario>& source) {
  if (!(mass >= 0.0)) throw Error("mass must be nonnegative");
  const auto d = four_gradient(history, slice);
  auto r = report_for(history, slice, "scalar");
  r.term("kinetic_A") = scalar_kinetic(d);
  r.term("mass_term") = mass_integral(history.snapshots[slice], mass);
  if (source) r.term("source_coupling") = scalar_coupling(history.snapshots[slice], r.time, *source);
  r.finalize();
  return r;
}

template <std::size_t N>
LagrangianReport split_density(const FrequencySplit<N>& split, std::size_t slice, double mass) {
  const auto a = difference_field(split);
  const auto b = sum_field(split);
  LagrangianReport r;
  if constexpr (N == 4) {
    r = report_for(a.data, slice, "maxwell-split");
    r.term("kinetic_A") = maxwell_kinetic(field_strength(a.data, slice));
    r.term("kinetic_B") = maxwell_kinetic(field_strength(b.data, slice));
  } else {
    r = report_for(a.data, slice, "scalar-split");
    r.term("kinetic_A") = scalar_kinetic(four_gradient(a.data, slice));
    r.term("kinetic_B") = scalar_kinetic(four_gradient(b.data, slice));
    r.term("mass_term") = mass_integral(a.data.snapshots[slice], mass);
  }
  r.finalize();
  return r;
}

namespace {

struct Violation {
  double worst = 0.0;
  void add(double diff, double scale) {
    if (scale > 0.0) {
      worst = std::max(worst, diff / scale);
    } else if (diff > 0.0) {
      worst = std::max(worst, 1.0);
    }
  }
};

template <class T>
const Lattice<T, 6>& as_lattice(const FieldStrength<T>& f) {
  return f.data();
}

template <class T, std::size_t N>
const Lattice<T, N>& as_lattice(const Lattice<T, N>& f) {
  return f;
}

template <class L>
double max_abs_span(const L& f) {
  return f.max_abs();
}

}  // namespace

template <std::size_t N>
double kinetic_split_check(const FrequencySplit<N>& split) {
  const auto a = difference_field(split);
  const auto b = sum_field(split);
  Violation v;
  for (std::size_t n = 1; n + 1 < split.plus.size(); ++n) {
    auto run = [&](const auto& fp, const auto& fm, const auto& fa, const auto& fb) {
      const auto& dp = as_lattice(fp);
      const auto& dm = as_lattice(fm);
      const auto& da = as_lattice(fa);
      const auto& db = as_lattice(fb);
      const double s1 = std::max({max_abs_span(da), max_abs_span(db), 2.0 * max_abs_span(dp),
                                  2.0 * max_abs_span(dm)});
      double e1 = 0.0;
      double e2 = 0.0;
      for (std::size_t k = 0; k < dp.data().size(); ++k) {
        e1 = std::max(e1, std::abs(da.data()[k] + db.data()[k] - 2.0 * dp.data()[k]));
        e2 = std::max(e2, std::abs(db.data()[k] - da.data()[k] - 2.0 * dm.data()[k]));
      }
      v.add(e1, s1);
      v.add(e2, s1);
      const auto aa = contract(fa, fa);
      const auto bb = contract(fb, fb);
      const auto pp = contract(fp, fp);
      const auto mm = contract(fm, fm);
      const double s2 = std::max({max_abs_span(aa), max_abs_span(bb), 2.0 * max_abs_span(pp),
                                  2.0 * max_abs_span(mm)});
      double e3 = 0.0;
      for (std::size_t k = 0; k < aa.sites(); ++k) {
        e3 = std::max(e3, std::abs(aa(0, k) + bb(0, k) - 2.0 * (pp(0, k) + mm(0, k))));
      }
      v.add(e3, s2);
    };
    if constexpr (N == 4) {
      run(field_strength(split.plus, n), field_strength(split.minus, n), field_strength(a.data, n),
          field_strength(b.data, n));
    } else {
      run(four_gradient(split.plus, n), four_gradient(split.minus, n), four_gradient(a.data, n),
          four_gradient(b.data, n));
    }
  }
  return v.worst;
}

template <class T, std::size_t N>
double euler_lagrange_residual(const FieldHistory<T, N>& history, double mass,
                               const std::optional<WaveSystem<T, N>>& system) {
  if (history.stride != 1) throw UnsupportedError("Euler-Lagrange residual needs a stride-1 history");
  if (history.size() < 3) {
    throw SamplingError("Euler-Lagrange residual needs at least 3 snapshots, got " +
                        std::to_string(history.size()));
  }
  history.require_uniform();
  const WaveSystem<T, N> sys = system ? *system
                               : history.system ? *history.system
                                                : WaveSystem<T, N>(history.grid(), mass);
  const double inv_dt2 = 1.0 / (history.spacing() * history.spacing());
  Lattice<T, N> rhs(history.grid());
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < history.size(); ++n) {
    sys.apply(history.snapshots[n], history.times[n], rhs);
    auto p = history.snapshots[n + 1].data();
    auto c = history.snapshots[n].data();
    auto m = history.snapshots[n - 1].data();
    auto r = rhs.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      worst = std::max(worst, static_cast<double>(std::abs((p[k] - 2.0 * c[k] + m[k]) * inv_dt2 - r[k])));
    }
  }
  return worst;
}

template <std::size_t N>
cplx coupling_term(const ComplexHistory<N>& field, std::size_t slice, const ChargeScenario& current) {
  if (slice >= field.size()) throw Error("slice out of range");
  const auto& f = field.snapshots[slice];
  const double t = field.times[slice];
  if constexpr (N == 4) {
    return four_vector_coupling(f, t, current);
  } else {
    return scalar_coupling(f, t, current);
  }
}

template class FieldStrength<double>;
template class FieldStrength<cplx>;

#define XFL_INSTANTIATE_LAGRANGIAN_T(T)                                                        \
  template FieldStrength<T> field_strength<T>(const FieldHistory<T, 4>&, std::size_t);         \
  template FourGradient<T> four_gradient<T>(const FieldHistory<T, 1>&, std::size_t);           \
  template Lattice<T, 1> contract<T>(const FieldStrength<T>&, const FieldStrength<T>&);        \
  template Lattice<T, 1> contract<T>(const FourGradient<T>&, const FourGradient<T>&);          \
  template LagrangianReport maxwell_density<T>(const FieldHistory<T, 4>&, std::size_t,         \
                                               const std::optional<ChargeScenario>&);          \
  template LagrangianReport scalar_density<T>(const FieldHistory<T, 1>&, std::size_t, double,  \
                                              const std::optional<ChargeScenario>&);           \
  template double euler_lagrange_residual<T, 1>(const FieldHistory<T, 1>&, double,             \
                                                const std::optional<WaveSystem<T, 1>>&);       \
  template double euler_lagrange_residual<T, 4>(const FieldHistory<T, 4>&, double,             \
                                                const std::optional<WaveSystem<T, 4>>&);

XFL_INSTANTIATE_LAGRANGIAN_T(double)
XFL_INSTANTIATE_LAGRANGIAN_T(cplx)

template LagrangianReport split_density<1>(const FrequencySplit<1>&, std::size_t, double);
template LagrangianReport split_density<4>(const FrequencySplit<4>&, std::size_t, double);
template double kinetic_split_check<1>(const FrequencySplit<1>&);
template double kinetic_split_check<4>(const FrequencySplit<4>&);
template cplx coupling_term<1>(const ComplexHistory<1>&, std::size_t, const ChargeScenario&);
template cplx coupling_term<4>(const ComplexHistory<4>&, std::size_t, const ChargeScenario&);

#undef XFL_INSTANTIATE_LAGRANGIAN_T

}  // namespace xfl
