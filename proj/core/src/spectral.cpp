#include "xfl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <nlohmann/json.hpp>

#include "fft.hpp"
#include "xfl/field_io.hpp"

namespace xfl {

std::string_view to_string(FrequencyConvention c) {
  return c == FrequencyConvention::negative_exponent ? "negative-exponent" : "positive-exponent";
}

FrequencyConvention frequency_convention_from_string(std::string_view s) {
  if (s == "negative-exponent") return FrequencyConvention::negative_exponent;
  if (s == "positive-exponent") return FrequencyConvention::positive_exponent;
  throw Error("unknown frequency convention '" + std::string(s) + "'");
}

namespace {

template <class T, std::size_t N>
void require_spectral_history(const FieldHistory<T, N>& h) {
  h.require_uniform();
  if (h.size() < kMinSpectralSnapshots) {
    throw FormatError("spectral analysis needs at least " + std::to_string(kMinSpectralSnapshots) +
                      " snapshots, got " + std::to_string(h.size()));
  }
}

template <std::size_t N>
ComplexHistory<N> empty_like(const std::vector<double>& times, const Grid3& grid, std::size_t stride,
                             double step_dt, const std::string& species) {
  ComplexHistory<N> out;
  out.times = times;
  out.stride = stride;
  out.step_dt = step_dt;
  out.species = species;
  out.snapshots.assign(times.size(), Lattice<cplx, N>(grid));
  return out;
}

// Weight of temporal bin k in the positive-frequency part.
double plus_weight(std::size_t k, std::size_t n, FrequencyConvention convention) {
  if (k == 0 || 2 * k == n) return 0.5;
  const bool upper = 2 * k > n;  // e^{-i w t} with w > 0 lands in the upper half
  return (upper == (convention == FrequencyConvention::negative_exponent)) ? 1.0 : 0.0;
}

}  // namespace

template <class T, std::size_t N>
FrequencySplit<N> decompose(const FieldHistory<T, N>& history, const DecomposeOptions& options) {
  require_spectral_history(history);
  const std::size_t nt = history.size();
  const Grid3& grid = history.grid();
  const std::size_t sites = grid.sites();

  auto original = std::make_shared<ComplexHistory<N>>(
      empty_like<N>(history.times, grid, history.stride, history.step_dt, history.species));
  for (std::size_t t = 0; t < nt; ++t) {
    auto src = history.snapshots[t].data();
    auto dst = original->snapshots[t].data();
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] = src[n];
  }

  FrequencySplit<N> split;
  split.plus = empty_like<N>(history.times, grid, history.stride, history.step_dt, history.species);
  split.minus = split.plus;
  split.convention = options.convention;
  split.window = options.window;

  std::vector<double> taper(nt, 1.0);
  if (options.window == TimeWindow::hann) {
    for (std::size_t t = 0; t < nt; ++t) {
      taper[t] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                        static_cast<double>(nt)));
    }
  }
  std::vector<double> weight(nt);
  for (std::size_t k = 0; k < nt; ++k) weight[k] = plus_weight(k, nt, options.convention);

  std::vector<cplx> series(sites * nt);
  std::vector<cplx> other(sites * nt);
  const double inv_n = 1.0 / static_cast<double>(nt);
  for (std::size_t c = 0; c < N; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      auto f = original->snapshots[t].component(c);
      for (std::size_t s = 0; s < sites; ++s) series[s * nt + t] = f[s] * taper[t];
    }
    fft::complex_batch(static_cast<int>(nt), static_cast<int>(sites), series, -1);
    for (std::size_t s = 0; s < sites; ++s) {
      for (std::size_t k = 0; k < nt; ++k) {
        const cplx v = series[s * nt + k] * inv_n;
        series[s * nt + k] = v * weight[k];
        other[s * nt + k] = v * (1.0 - weight[k]);
      }
    }
    fft::complex_batch(static_cast<int>(nt), static_cast<int>(sites), series, +1);
    fft::complex_batch(static_cast<int>(nt), static_cast<int>(sites), other, +1);
    for (std::size_t t = 0; t < nt; ++t) {
      auto p = split.plus.snapshots[t].component(c);
      auto m = split.minus.snapshots[t].component(c);
      for (std::size_t s = 0; s < sites; ++s) {
        p[s] = series[s * nt + t];
        m[s] = other[s * nt + t];
      }
    }
  }
  if (options.window == TimeWindow::hann) {
    for (std::size_t t = 0; t < nt; ++t) original->snapshots[t] *= cplx(taper[t], 0.0);
  }
  split.original = std::move(original);
  return split;
}

template <std::size_t N>
DifferenceField<N> difference_field(const FrequencySplit<N>& split) {
  DifferenceField<N> d{split.plus};
  for (std::size_t t = 0; t < d.data.size(); ++t) d.data.snapshots[t] -= split.minus.snapshots[t];
  return d;
}

template <std::size_t N>
SumField<N> sum_field(const FrequencySplit<N>& split) {
  SumField<N> s{split.plus};
  for (std::size_t t = 0; t < s.data.size(); ++t) s.data.snapshots[t] += split.minus.snapshots[t];
  return s;
}

cplx ModeSpectrum::at(std::size_t c, std::size_t t, std::size_t i, std::size_t j, std::size_t k) const {
  const std::size_t sites = dims[0] * dims[1] * dims[2];
  return coefficients[c * bins_per_component() + t * sites + i + dims[0] * (j + dims[1] * k)];
}

Vec3 ModeSpectrum::wave_vector(std::size_t i, std::size_t j, std::size_t k) const {
  const std::size_t b[3] = {i, j, k};
  Vec3 p{};
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<double>(dims[a]);
    const double s = 2 * b[a] <= dims[a] ? static_cast<double>(b[a]) : static_cast<double>(b[a]) - n;
    p[a] = 2.0 * std::numbers::pi * s / (n * spacing);
  }
  return p;
}

double ModeSpectrum::frequency(std::size_t t) const {
  const auto n = static_cast<double>(time_bins);
  const double s = 2 * t <= time_bins ? static_cast<double>(t) : static_cast<double>(t) - n;
  return -2.0 * std::numbers::pi * s / (n * dt);
}

double ModeSpectrum::total_power() const {
  double sum = 0.0;
  for (const auto& v : coefficients) sum += std::norm(v);
  return sum;
}

template <class T, std::size_t N>
ModeSpectrum mode_spectrum(const FieldHistory<T, N>& history) {
  require_spectral_history(history);
  const Grid3& grid = history.grid();
  if (grid.boundary() != Boundary::periodic) {
    throw UnsupportedError("mode spectrum needs a periodic spatial boundary");
  }
  ModeSpectrum out;
  out.dims = grid.dims();
  out.time_bins = history.size();
  out.components = N;
  out.spacing = grid.spacing();
  out.dt = history.spacing();
  const std::size_t sites = grid.sites();
  const std::size_t per = out.bins_per_component();
  out.coefficients.assign(N * per, cplx{});
  const double scale = std::sqrt(grid.cell_volume() * out.dt / static_cast<double>(per));
  const std::vector<int> shape = {static_cast<int>(out.time_bins), static_cast<int>(out.dims[2]),
                                  static_cast<int>(out.dims[1]), static_cast<int>(out.dims[0])};
  for (std::size_t c = 0; c < N; ++c) {
    std::span<cplx> block(out.coefficients.data() + c * per, per);
    for (std::size_t t = 0; t < out.time_bins; ++t) {
      auto f = history.snapshots[t].component(c);
      for (std::size_t s = 0; s < sites; ++s) block[t * sites + s] = f[s];
    }
    fft::complex_nd(shape, block, -1);
    for (auto& v : block) v *= scale;
  }
  return out;
}

template <class T, std::size_t N>
double spacetime_norm2(const FieldHistory<T, N>& history) {
  double sum = 0.0;
  for (const auto& s : history.snapshots) {
    for (const auto& v : s.data()) sum += std::norm(cplx(v));
  }
  return sum * history.grid().cell_volume() * history.spacing();
}

template <std::size_t N>
double independence_check(const DifferenceField<N>& diff, const SumField<N>& sum) {
  if (diff.data.size() != sum.data.size()) throw GridMismatchError("histories differ in length");
  double a = 0.0;
  double b = 0.0;
  cplx c{};
  for (std::size_t t = 0; t < diff.data.size(); ++t) {
    require_same_grid(diff.data.snapshots[t].grid(), sum.data.snapshots[t].grid(), "independence check");
    auto x = diff.data.snapshots[t].data();
    auto y = sum.data.snapshots[t].data();
    for (std::size_t n = 0; n < x.size(); ++n) {
      a += std::norm(x[n]);
      b += std::norm(y[n]);
      c += std::conj(x[n]) * y[n];
    }
  }
  if (a == 0.0 || b == 0.0) throw DegenerateInputError("independence check of a zero history");
  // Scale both to unit norm so the ratio measures alignment, not magnitude.
  const double g = std::abs(c) / std::sqrt(a * b);
  const double hi = 1.0 + std::min(g, 1.0);
  const double lo = 1.0 - std::min(g, 1.0);
  return lo / hi;
}

template <std::size_t N>
void save_split(const std::filesystem::path& stem, const FrequencySplit<N>& split) {
  auto plus = stem;
  plus += ".plus";
  auto minus = stem;
  minus += ".minus";
  save_history(plus, split.plus);
  save_history(minus, split.minus);
  nlohmann::json j;
  j["convention"] = to_string(split.convention);
  j["window"] = split.window == TimeWindow::hann ? "hann" : "none";
  j["bins"] = "temporal DFT bins; positive-frequency bins go to plus, the zero bin and the Nyquist "
              "bin of an even-length history are split equally";
  j["plus"] = plus.filename().string();
  j["minus"] = minus.filename().string();
  j["snapshots"] = split.plus.size();
  auto side = stem;
  side += ".split.json";
  std::ofstream out(side);
  if (!out) throw FormatError("cannot open " + side.string() + " for writing");
  out << j.dump(2) << '\n';
}

void save_spectrum(const std::filesystem::path& stem, const ModeSpectrum& spectrum) {
  auto data = stem;
  data += ".xfl";
  {
    std::ofstream out(data, std::ios::binary);
    if (!out) throw FormatError("cannot open " + data.string() + " for writing");
    const std::size_t sites = spectrum.dims[0] * spectrum.dims[1] * spectrum.dims[2];
    for (std::size_t t = 0; t < spectrum.time_bins; ++t) {
      LatticeRecord rec;
      rec.dims = spectrum.dims;
      rec.spacing = spectrum.spacing;
      rec.boundary = Boundary::periodic;
      rec.values_per_site = static_cast<std::uint32_t>(2 * spectrum.components);
      rec.values.reserve(sites * 2 * spectrum.components);
      for (std::size_t s = 0; s < sites; ++s) {
        for (std::size_t c = 0; c < spectrum.components; ++c) {
          const cplx v = spectrum.coefficients[c * spectrum.bins_per_component() + t * sites + s];
          rec.values.push_back(v.real());
          rec.values.push_back(v.imag());
        }
      }
      write_record(out, rec);
    }
  }
  nlohmann::json j;
  j["convention"] = to_string(FrequencyConvention::negative_exponent);
  j["layout"] = "record t holds temporal bin t; spatial and temporal bins in FFT order; mode "
                "exp(i(p.x - w t)) sits at spatial bin p and temporal bin with signed index "
                "-w T / (2 pi)";
  j["normalization"] = "sum |c|^2 = sum |f|^2 h^3 dt";
  j["time_bins"] = spectrum.time_bins;
  j["dt"] = spectrum.dt;
  j["components"] = spectrum.components;
  auto side = stem;
  side += ".json";
  std::ofstream out(side);
  if (!out) throw FormatError("cannot open " + side.string() + " for writing");
  out << j.dump(2) << '\n';
}

#define XFL_INSTANTIATE_SPECTRAL_T(T, N)                                                      \
  template FrequencySplit<N> decompose<T, N>(const FieldHistory<T, N>&, const DecomposeOptions&); \
  template ModeSpectrum mode_spectrum<T, N>(const FieldHistory<T, N>&);                       \
  template double spacetime_norm2<T, N>(const FieldHistory<T, N>&);

#define XFL_INSTANTIATE_SPECTRAL(N)                                                           \
  XFL_INSTANTIATE_SPECTRAL_T(double, N)                                                       \
  XFL_INSTANTIATE_SPECTRAL_T(cplx, N)                                                         \
  template DifferenceField<N> difference_field<N>(const FrequencySplit<N>&);                  \
  template SumField<N> sum_field<N>(const FrequencySplit<N>&);                                \
  template double independence_check<N>(const DifferenceField<N>&, const SumField<N>&);       \
  template void save_split<N>(const std::filesystem::path&, const FrequencySplit<N>&);

XFL_INSTANTIATE_SPECTRAL(1)
XFL_INSTANTIATE_SPECTRAL(4)

#undef XFL_INSTANTIATE_SPECTRAL
#undef XFL_INSTANTIATE_SPECTRAL_T

}  // namespace xfl
