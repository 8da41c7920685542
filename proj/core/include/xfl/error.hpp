#pragma once

#include <stdexcept>
#include <string>

namespace xfl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid lattice geometry (too small, non-positive spacing, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A position (charge, displaced charge, probe) lies outside the grid.
class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

/// |v| >= 1 in units where c = 1.
class SuperluminalError : public Error {
 public:
  using Error::Error;
};

/// Field evaluated at the location of its own point source.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Two lattices combined in one operation live on different grids.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Too few snapshots or periods to carry out a measurement.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: bad file, non-uniform history, bad magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operation is not available for the requested boundary mode or stride.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Input is numerically degenerate (e.g. all-zero fields).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A spinor with non-positive Dirac norm cannot be normalized.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace xfl
