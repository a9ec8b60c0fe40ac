#pragma once

#include "chb/grid.hpp"
#include "chb/material.hpp"
#include "chb/sparse.hpp"

#include <array>

namespace chb::q1 {

/// 2x2 Gauss rule on the reference square [0,1]^2 with the bilinear basis
/// N0 = (1-x)(1-y), N1 = x(1-y), N2 = xy, N3 = (1-x)y.
inline constexpr int kNodes = 4;
inline constexpr int kPoints = 4;

struct Reference {
  std::array<Eigen::Vector2d, kPoints> points;
  std::array<std::array<double, kNodes>, kPoints> N;
  std::array<std::array<Eigen::Vector2d, kNodes>, kPoints> dN;  // reference gradients
};

const Reference& reference();

/// Per-element, per-Gauss-point samples: row e holds the four point values.
using QuadField = Eigen::Matrix<double, Eigen::Dynamic, kPoints, Eigen::RowMajor>;

/// Every element is a square of side h, so the Jacobian is h I and each
/// Gauss point carries weight h^2 / 4.
inline double weight(const Mesh& mesh) { return 0.25 * mesh.h * mesh.h; }

using ScalarDofs = Eigen::Matrix<double, kNodes, 1>;
using VectorDofs = Eigen::Matrix<double, 2 * kNodes, 1>;

ScalarDofs gather(const Mesh& mesh, int e, const Vector& f);
VectorDofs gather_vector(const Mesh& mesh, int e, const Vector& u);

double value(int q, const ScalarDofs& f);
Eigen::Vector2d gradient(const Mesh& mesh, int q, const ScalarDofs& f);
/// Physical gradient of local basis function a at Gauss point q.
Eigen::Vector2d basis_gradient(const Mesh& mesh, int q, int a);
Tensor2<double> strain(const Mesh& mesh, int q, const VectorDofs& u);
double divergence(const Mesh& mesh, int q, const VectorDofs& u);
/// Symmetric gradient of the vector basis function for local dof (a, c).
Tensor2<double> basis_strain(const Mesh& mesh, int q, int a, int c);

/// Q1 interpolant of a nodal field sampled at the Gauss points.
QuadField at_quadrature(const Mesh& mesh, const Vector& f);

/// Load vector (g, N_i) for a quadrature-sampled density g.
Vector load(const Mesh& mesh, const QuadField& g);
/// Row sums of the consistent mass matrix.
Vector lumped_mass(const Mesh& mesh);

/// Integral of a quadrature-sampled density.
double integrate(const Mesh& mesh, const QuadField& g);

}  // namespace chb::q1
