#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace chb {

/// Structured subdivision of the unit square into n x n square cells.
struct GridSpec {
  int divisions = 1;
};

/// Q1 mesh of [0,1]^2.
///
/// Nodes are numbered lexicographically, row-major in (x2, x1): node (i, j)
/// with x1 = i h and x2 = j h has index j (n + 1) + i. Element (i, j) lists
/// its corners counterclockwise starting at the lower-left node.
struct Mesh {
  int n = 0;
  double h = 0.0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> elements;
  std::vector<int> boundary_nodes;
  std::vector<std::uint8_t> on_boundary;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int node_index(int i, int j) const { return j * (n + 1) + i; }
  int element_index(int i, int j) const { return j * n + i; }
  /// Lower-left corner of an element.
  const Eigen::Vector2d& element_origin(int e) const { return nodes[elements[e][0]]; }
};

/// Scalar fields carry one unknown per node; vector fields interleave the two
/// components per node: dof 2k is u1 at node k, dof 2k+1 is u2.
struct DofMap {
  int num_scalar = 0;
  int num_vector = 0;
  std::vector<std::uint8_t> dirichlet_mask;  // over vector dofs

  static constexpr int vector_dof(int node, int component) { return 2 * node + component; }
  static constexpr int node_of_vector_dof(int dof) { return dof / 2; }
  static constexpr int component_of_vector_dof(int dof) { return dof % 2; }
  int num_constrained() const;
};

Mesh build_mesh(const GridSpec& spec);
DofMap build_dofmap(const Mesh& mesh);

}  // namespace chb
