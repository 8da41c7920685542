#pragma once

#include <fstream>

namespace xfl {

template <class T, std::size_t N>
void save_lattice(const std::filesystem::path& path, const Lattice<T, N>& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  save_lattice(out, f);
}

template <class T, std::size_t N>
Lattice<T, N> load_lattice(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return load_lattice<T, N>(in);
}

}  // namespace xfl
