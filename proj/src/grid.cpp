#include "chb/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace chb {

Mesh build_mesh(const GridSpec& spec) {
  if (spec.divisions < 1) {
    throw std::invalid_argument("grid divisions must be >= 1, got " +
                                std::to_string(spec.divisions));
  }
  Mesh mesh;
  const int n = spec.divisions;
  mesh.n = n;
  mesh.h = 1.0 / n;
  mesh.nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  mesh.on_boundary.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // i * h rather than accumulated sums so that the last node is exactly 1
      mesh.nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      if (i == 0 || i == n || j == 0 || j == n) {
        const int k = mesh.node_index(i, j);
        mesh.on_boundary[k] = 1;
        mesh.boundary_nodes.push_back(k);
      }
    }
  }
  mesh.elements.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.elements.push_back({mesh.node_index(i, j), mesh.node_index(i + 1, j),
                               mesh.node_index(i + 1, j + 1), mesh.node_index(i, j + 1)});
    }
  }
  return mesh;
}

int DofMap::num_constrained() const {
  return static_cast<int>(std::count(dirichlet_mask.begin(), dirichlet_mask.end(), 1));
}

DofMap build_dofmap(const Mesh& mesh) {
  DofMap dofs;
  dofs.num_scalar = mesh.num_nodes();
  dofs.num_vector = 2 * mesh.num_nodes();
  dofs.dirichlet_mask.assign(dofs.num_vector, 0);
  for (int k : mesh.boundary_nodes) {
    dofs.dirichlet_mask[DofMap::vector_dof(k, 0)] = 1;
    dofs.dirichlet_mask[DofMap::vector_dof(k, 1)] = 1;
  }
  return dofs;
}

}  // namespace chb
