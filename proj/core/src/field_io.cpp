#include "xfl/field_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace xfl {

namespace {

constexpr char kMagic[16] = {'X', 'F', 'L', 'D', 'L', 'A', 'B', '1', 0, 0, 0, 0, 0, 0, 0, 0};

template <class U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t n = 0; n < sizeof(U) / 2; ++n) std::swap(bytes[n], bytes[sizeof(U) - 1 - n]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw FormatError("truncated lattice record");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t n = 0; n < sizeof(U) / 2; ++n) std::swap(bytes[n], bytes[sizeof(U) - 1 - n]);
  }
  U value;
  std::memcpy(&value, bytes, sizeof(U));
  return value;
}

}  // namespace

void write_record(std::ostream& out, const LatticeRecord& rec) {
  const std::size_t sites = rec.dims[0] * rec.dims[1] * rec.dims[2];
  if (rec.values.size() != sites * rec.values_per_site) {
    throw FormatError("lattice record payload does not match its header");
  }
  out.write(kMagic, sizeof(kMagic));
  for (auto d : rec.dims) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put_le<double>(out, rec.spacing);
  put_le<std::uint32_t>(out, rec.values_per_site);
  put_le<std::uint8_t>(out, rec.boundary == Boundary::periodic ? 0 : 1);
  for (double v : rec.values) put_le<double>(out, v);
  if (!out) throw FormatError("failed writing lattice record");
}

LatticeRecord read_record(std::istream& in) {
  char magic[16];
  if (!in.read(magic, sizeof(magic))) throw FormatError("truncated lattice record");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("bad lattice magic");
  LatticeRecord rec;
  for (auto& d : rec.dims) d = get_le<std::uint32_t>(in);
  rec.spacing = get_le<double>(in);
  rec.values_per_site = get_le<std::uint32_t>(in);
  const auto flag = get_le<std::uint8_t>(in);
  if (flag > 1) throw FormatError("bad boundary flag in lattice record");
  rec.boundary = flag == 0 ? Boundary::periodic : Boundary::free_space;
  if (rec.values_per_site == 0) throw FormatError("lattice record has no components");
  const std::size_t sites = rec.dims[0] * rec.dims[1] * rec.dims[2];
  if (sites == 0) throw FormatError("lattice record has an empty grid");
  rec.values.resize(sites * rec.values_per_site);
  for (auto& v : rec.values) v = get_le<double>(in);
  return rec;
}

}  // namespace xfl
