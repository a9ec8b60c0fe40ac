#include "chb/q1.hpp"

#include <cmath>

namespace chb::q1 {

const Reference& reference() {
  static const Reference ref = [] {
    Reference r;
    const double lo = 0.5 - 0.5 / std::sqrt(3.0);
    const double hi = 0.5 + 0.5 / std::sqrt(3.0);
    r.points = {Eigen::Vector2d(lo, lo), Eigen::Vector2d(hi, lo), Eigen::Vector2d(hi, hi),
                Eigen::Vector2d(lo, hi)};
    for (int q = 0; q < kPoints; ++q) {
      const double x = r.points[q].x(), y = r.points[q].y();
      r.N[q] = {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
      r.dN[q] = {Eigen::Vector2d(-(1 - y), -(1 - x)), Eigen::Vector2d(1 - y, -x),
                 Eigen::Vector2d(y, x), Eigen::Vector2d(-y, 1 - x)};
    }
    return r;
  }();
  return ref;
}

ScalarDofs gather(const Mesh& mesh, int e, const Vector& f) {
  const auto& nodes = mesh.elements[e];
  return ScalarDofs(f[nodes[0]], f[nodes[1]], f[nodes[2]], f[nodes[3]]);
}

VectorDofs gather_vector(const Mesh& mesh, int e, const Vector& u) {
  VectorDofs out;
  for (int a = 0; a < kNodes; ++a) {
    out[2 * a] = u[DofMap::vector_dof(mesh.elements[e][a], 0)];
    out[2 * a + 1] = u[DofMap::vector_dof(mesh.elements[e][a], 1)];
  }
  return out;
}

double value(int q, const ScalarDofs& f) {
  const auto& N = reference().N[q];
  return N[0] * f[0] + N[1] * f[1] + N[2] * f[2] + N[3] * f[3];
}

Eigen::Vector2d basis_gradient(const Mesh& mesh, int q, int a) {
  return reference().dN[q][a] / mesh.h;
}

Eigen::Vector2d gradient(const Mesh& mesh, int q, const ScalarDofs& f) {
  const auto& dN = reference().dN[q];
  return (dN[0] * f[0] + dN[1] * f[1] + dN[2] * f[2] + dN[3] * f[3]) / mesh.h;
}

Tensor2<double> strain(const Mesh& mesh, int q, const VectorDofs& u) {
  Tensor2<double> grad = Tensor2<double>::Zero();  // grad(i, j) = d u_i / d x_j
  for (int a = 0; a < kNodes; ++a) {
    const Eigen::Vector2d g = basis_gradient(mesh, q, a);
    grad.row(0) += u[2 * a] * g.transpose();
    grad.row(1) += u[2 * a + 1] * g.transpose();
  }
  return 0.5 * (grad + grad.transpose());
}

double divergence(const Mesh& mesh, int q, const VectorDofs& u) {
  double div = 0.0;
  for (int a = 0; a < kNodes; ++a) {
    const Eigen::Vector2d g = basis_gradient(mesh, q, a);
    div += u[2 * a] * g.x() + u[2 * a + 1] * g.y();
  }
  return div;
}

Tensor2<double> basis_strain(const Mesh& mesh, int q, int a, int c) {
  const Eigen::Vector2d g = basis_gradient(mesh, q, a);
  Tensor2<double> eps = Tensor2<double>::Zero();
  eps(c, 0) += 0.5 * g.x();
  eps(c, 1) += 0.5 * g.y();
  eps(0, c) += 0.5 * g.x();
  eps(1, c) += 0.5 * g.y();
  return eps;
}

QuadField at_quadrature(const Mesh& mesh, const Vector& f) {
  QuadField out(mesh.num_elements(), kPoints);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ScalarDofs fe = gather(mesh, e, f);
    for (int q = 0; q < kPoints; ++q) out(e, q) = value(q, fe);
  }
  return out;
}

Vector load(const Mesh& mesh, const QuadField& g) {
  Vector b = Vector::Zero(mesh.num_nodes());
  const double w = weight(mesh);
  const auto& N = reference().N;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int q = 0; q < kPoints; ++q) {
      for (int a = 0; a < kNodes; ++a) b[mesh.elements[e][a]] += w * g(e, q) * N[q][a];
    }
  }
  return b;
}

Vector lumped_mass(const Mesh& mesh) {
  return load(mesh, QuadField::Ones(mesh.num_elements(), kPoints));
}

double integrate(const Mesh& mesh, const QuadField& g) { return weight(mesh) * g.sum(); }

}  // namespace chb::q1
