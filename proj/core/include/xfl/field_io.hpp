#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "xfl/lattice.hpp"

namespace xfl {

// Binary lattice record, little-endian throughout:
//   16 bytes  magic "XFLDLAB1" zero-padded
//   u32 x3    dims (nx, ny, nz)
//   f64       spacing
//   u32       values per site (complex components count twice)
//   u8        boundary (0 = periodic, 1 = free-space)
//   f64 ...   site data, x-fastest, components interleaved per site,
//             complex values stored as (re, im)
// The origin is not part of the format; loaded grids start at (0, 0, 0).

struct LatticeRecord {
  Index3 dims{};
  double spacing = 1.0;
  std::uint32_t values_per_site = 1;
  Boundary boundary = Boundary::periodic;
  std::vector<double> values;

  Grid3 grid() const { return Grid3(dims, spacing, {0.0, 0.0, 0.0}, boundary); }
};

void write_record(std::ostream& out, const LatticeRecord& rec);
LatticeRecord read_record(std::istream& in);

template <class T, std::size_t N>
LatticeRecord to_record(const Lattice<T, N>& f) {
  constexpr std::size_t per = is_complex_v<T> ? 2 : 1;
  LatticeRecord rec;
  rec.dims = f.grid().dims();
  rec.spacing = f.grid().spacing();
  rec.boundary = f.grid().boundary();
  rec.values_per_site = static_cast<std::uint32_t>(N * per);
  rec.values.reserve(f.sites() * N * per);
  for (std::size_t site = 0; site < f.sites(); ++site) {
    for (std::size_t c = 0; c < N; ++c) {
      if constexpr (is_complex_v<T>) {
        rec.values.push_back(f(c, site).real());
        rec.values.push_back(f(c, site).imag());
      } else {
        rec.values.push_back(f(c, site));
      }
    }
  }
  return rec;
}

template <class T, std::size_t N>
Lattice<T, N> from_record(const LatticeRecord& rec) {
  constexpr std::size_t per = is_complex_v<T> ? 2 : 1;
  if (rec.values_per_site != N * per) {
    throw FormatError("lattice record has " + std::to_string(rec.values_per_site) +
                      " values per site, expected " + std::to_string(N * per));
  }
  Lattice<T, N> f(rec.grid());
  std::size_t n = 0;
  for (std::size_t site = 0; site < f.sites(); ++site) {
    for (std::size_t c = 0; c < N; ++c) {
      if constexpr (is_complex_v<T>) {
        f(c, site) = cplx(rec.values[n], rec.values[n + 1]);
        n += 2;
      } else {
        f(c, site) = rec.values[n++];
      }
    }
  }
  return f;
}

template <class T, std::size_t N>
void save_lattice(std::ostream& out, const Lattice<T, N>& f) {
  write_record(out, to_record(f));
}

template <class T, std::size_t N>
Lattice<T, N> load_lattice(std::istream& in) {
  return from_record<T, N>(read_record(in));
}

template <class T, std::size_t N>
void save_lattice(const std::filesystem::path& path, const Lattice<T, N>& f);

template <class T, std::size_t N>
Lattice<T, N> load_lattice(const std::filesystem::path& path);

}  // namespace xfl

#include "xfl/detail/field_io_impl.hpp"
