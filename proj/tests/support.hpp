#pragma once

#include <algorithm>
#include <memory>

#include "fvdg/assembly.hpp"

namespace fvdg::test {

/// Zero solution on `mesh`: size-1 coefficient vectors on FV cells, dim P_k on DG cells.
inline DiscreteSolution zero_solution(const Mesh& mesh, int degree, const Partition& partition) {
  DiscreteSolution u;
  u.mesh = std::make_shared<const Mesh>(mesh);
  u.bases = std::make_shared<const std::vector<CellBasis>>(build_bases(mesh, degree));
  u.partition = partition;
  u.degree = degree;
  u.coefficients.resize(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    u.coefficients[c].assign(partition.is_fv(c) ? 1 : static_cast<std::size_t>(dim_pk(degree)), 0.0);
  return u;
}

/// Sets a DG cell to mean + ux (x - x_c) + uy (y - y_c), exactly averaging to `mean`.
inline void set_linear(DiscreteSolution& u, std::size_t cell, double mean, double ux, double uy) {
  const CellBasis& b = (*u.bases)[cell];
  auto& a = u.coefficients[cell];
  std::fill(a.begin(), a.end(), 0.0);
  a[1] = ux * b.scale();
  a[2] = uy * b.scale();
  a[0] = mean - a[1] * b.moment(1) - a[2] * b.moment(2);
}

}  // namespace fvdg::test
