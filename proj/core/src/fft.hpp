#pragma once

// Thin FFTW wrappers. Plans use FFTW_ESTIMATE so results are bitwise
// reproducible run to run; planning is serialized behind a mutex.

#include <span>
#include <vector>

#include "xfl/lattice.hpp"

namespace xfl::fft {

/// Number of complex outputs of a 3D real transform over x-fastest `dims`.
std::size_t half_spectrum_size(const Index3& dims);

/// Unnormalized forward real-to-complex transform of an x-fastest 3D array.
/// The spectrum is laid out (kz, ky, kx) row-major with kx in [0, nx/2].
std::vector<cplx> forward_3d(const Index3& dims, std::span<const double> in);

/// Unnormalized inverse of forward_3d. Clobbers `spectrum`.
void inverse_3d(const Index3& dims, std::vector<cplx>& spectrum, std::span<double> out);

/// In-place complex transform over a row-major array with the given shape.
/// sign = -1 forward (e^{-i...}), +1 backward. Unnormalized.
void complex_nd(const std::vector<int>& shape, std::span<cplx> data, int sign);

/// `howmany` contiguous length-`n` complex sequences transformed in place.
void complex_batch(int n, int howmany, std::span<cplx> data, int sign);

}  // namespace xfl::fft
