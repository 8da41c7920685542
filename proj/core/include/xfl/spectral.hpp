#pragma once

#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include "xfl/dynamics.hpp"

namespace xfl {

/// Which temporal exponent counts as positive frequency.
enum class FrequencyConvention {
  negative_exponent,  // e^{-i w t}, w > 0 is positive frequency (default)
  positive_exponent,  // e^{+i w t}, w > 0 is positive frequency
};

std::string_view to_string(FrequencyConvention c);
FrequencyConvention frequency_convention_from_string(std::string_view s);

enum class TimeWindow { none, hann };

struct DecomposeOptions {
  FrequencyConvention convention = FrequencyConvention::negative_exponent;
  /// Hann tapering for off-grid frequencies. With a window the parts
  /// reconstruct the windowed history, not the original.
  TimeWindow window = TimeWindow::none;
};

template <std::size_t N>
using ComplexHistory = FieldHistory<cplx, N>;

/// Positive- and negative-frequency parts of a history. The zero-frequency
/// bin (and the Nyquist bin of an even-length history) is shared equally, so
/// plus + minus reproduces the input and a real input gives minus = conj(plus).
template <std::size_t N>
struct FrequencySplit {
  ComplexHistory<N> plus;
  ComplexHistory<N> minus;
  std::shared_ptr<const ComplexHistory<N>> original;
  FrequencyConvention convention = FrequencyConvention::negative_exponent;
  TimeWindow window = TimeWindow::none;
};

/// A = B+ - B-.
template <std::size_t N>
struct DifferenceField {
  ComplexHistory<N> data;
};

/// A_b = B+ + B-.
template <std::size_t N>
struct SumField {
  ComplexHistory<N> data;
};

/// Needs at least kMinSpectralSnapshots uniformly spaced snapshots
/// (FormatError otherwise). The split is exact only for frequencies on the
/// DFT grid; the history should span at least two periods of the slowest mode.
inline constexpr std::size_t kMinSpectralSnapshots = 8;

template <class T, std::size_t N>
FrequencySplit<N> decompose(const FieldHistory<T, N>& history, const DecomposeOptions& options = {});

template <std::size_t N>
DifferenceField<N> difference_field(const FrequencySplit<N>& split);
template <std::size_t N>
SumField<N> sum_field(const FrequencySplit<N>& split);

/// Space-time Fourier coefficients of a periodic history, scaled so that
/// sum |c|^2 = sum |f|^2 h^3 dt (Parseval with the lattice measure).
///
/// Coefficients of component c are stored row-major over (temporal bin,
/// kz, ky, kx) in FFT order. A mode exp(i (p . x - w t)) lands on the bin with
/// wave_vector() = p and frequency() = w; frequency() reports w in the
/// negative-exponent convention.
struct ModeSpectrum {
  Index3 dims{};
  std::size_t time_bins = 0;
  std::size_t components = 0;
  double spacing = 1.0;
  double dt = 1.0;
  std::vector<cplx> coefficients;  // components * time_bins * sites

  std::size_t bins_per_component() const { return time_bins * dims[0] * dims[1] * dims[2]; }
  cplx at(std::size_t c, std::size_t t, std::size_t i, std::size_t j, std::size_t k) const;
  Vec3 wave_vector(std::size_t i, std::size_t j, std::size_t k) const;
  double frequency(std::size_t t) const;
  /// sum |c|^2 over all bins and components.
  double total_power() const;
};

/// Throws UnsupportedError for free-space histories.
template <class T, std::size_t N>
ModeSpectrum mode_spectrum(const FieldHistory<T, N>& history);

/// sum |f|^2 h^3 dt over the history (dt = snapshot spacing).
template <class T, std::size_t N>
double spacetime_norm2(const FieldHistory<T, N>& history);

/// sigma_min / sigma_max of the Hermitian Gram matrix of the two flattened
/// histories. Throws DegenerateInputError when either history is zero.
template <std::size_t N>
double independence_check(const DifferenceField<N>& diff, const SumField<N>& sum);

/// <stem>.plus.xfl / <stem>.minus.xfl history files plus <stem>.split.json
/// naming the convention and the bin assignment.
template <std::size_t N>
void save_split(const std::filesystem::path& stem, const FrequencySplit<N>& split);

/// <stem>.xfl holds one record per temporal bin (spatial dims, complex
/// components); <stem>.json describes the layout.
void save_spectrum(const std::filesystem::path& stem, const ModeSpectrum& spectrum);

}  // namespace xfl
