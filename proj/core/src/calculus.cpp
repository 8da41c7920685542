#include "xfl/calculus.hpp"

namespace xfl {

ScalarLattice dot(const Vector3Lattice& a, const Vector3Lattice& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  ScalarLattice out(a.grid());
  for (std::size_t site = 0; site < a.sites(); ++site) {
    out(0, site) = a(0, site) * b(0, site) + a(1, site) * b(1, site) + a(2, site) * b(2, site);
  }
  return out;
}

}  // namespace xfl
