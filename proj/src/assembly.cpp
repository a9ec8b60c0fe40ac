#include "chb/assembly.hpp"

#include <vector>

namespace chb {

namespace {

std::vector<Triplet> reserve_triplets(const Mesh& mesh, int per_element) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * per_element);
  return trips;
}

template <class Kernel>
SparseMatrix scalar_operator(const Mesh& mesh, Kernel&& kernel) {
  auto trips = reserve_triplets(mesh, 16);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements[e];
    Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
    for (int q = 0; q < q1::kPoints; ++q) kernel(e, q, Ke);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trips.emplace_back(nodes[a], nodes[b], Ke(a, b));
  }
  const int n = mesh.num_nodes();
  return assemble_from_triplets(trips, n, n);
}

}  // namespace

SparseMatrix assemble_weighted_mass(const Mesh& mesh, const q1::QuadField& w) {
  const auto& N = q1::reference().N;
  const double wq = q1::weight(mesh);
  return scalar_operator(mesh, [&](int e, int q, Eigen::Matrix4d& Ke) {
    const Eigen::Vector4d Nq(N[q][0], N[q][1], N[q][2], N[q][3]);
    Ke += (wq * w(e, q)) * Nq * Nq.transpose();
  });
}

SparseMatrix assemble_scalar_mass(const Mesh& mesh) {
  return assemble_weighted_mass(mesh, q1::QuadField::Ones(mesh.num_elements(), q1::kPoints));
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const q1::QuadField& w) {
  const double wq = q1::weight(mesh);
  return scalar_operator(mesh, [&](int e, int q, Eigen::Matrix4d& Ke) {
    Eigen::Matrix<double, 2, 4> G;
    for (int a = 0; a < 4; ++a) G.col(a) = q1::basis_gradient(mesh, q, a);
    Ke += (wq * w(e, q)) * G.transpose() * G;
  });
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, double w) {
  return assemble_weighted_stiffness(
      mesh, q1::QuadField::Constant(mesh.num_elements(), q1::kPoints, w));
}

ElasticitySystem assemble_elasticity(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                                     double dt, const Vector& u_old) {
  if (!(dt > 0.0)) throw std::invalid_argument("assemble_elasticity: dt must be positive");
  const int ndof = 2 * mesh.num_nodes();
  const double wq = q1::weight(mesh);
  const double visc = t.Cv_scale / dt;
  const auto& N = q1::reference().N;
  auto trips = reserve_triplets(mesh, 64);
  Vector load = Vector::Zero(ndof);

  std::array<std::array<Tensor2<double>, 8>, q1::kPoints> basis;
  for (int q = 0; q < q1::kPoints; ++q)
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c) basis[q][2 * a + c] = q1::basis_strain(mesh, q, a, c);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements[e];
    const auto fe = q1::gather(mesh, e, phi);
    const auto ue_old = q1::gather_vector(mesh, e, u_old);
    Eigen::Matrix<double, 8, 8> Ke = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> fe_load = Eigen::Matrix<double, 8, 1>::Zero();
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      const ElasticModuli mod = interpolated_moduli(t, ph);
      const Tensor2<double> prestress = isotropic_apply(mod.lambda, mod.G, eigenstrain(t, ph));
      const Tensor2<double> eps_old = q1::strain(mesh, q, ue_old);
      for (int j = 0; j < 8; ++j) {
        const Tensor2<double> sj =
            isotropic_apply(mod.lambda, mod.G, basis[q][j]) + visc * basis[q][j];
        for (int i = 0; i < 8; ++i) Ke(i, j) += wq * contract(sj, basis[q][i]);
      }
      for (int i = 0; i < 8; ++i) {
        fe_load[i] += wq * (contract(prestress, basis[q][i]) +
                            visc * contract(eps_old, basis[q][i]) +
                            t.source_u[i % 2] * N[q][i / 2]);
      }
    }
    for (int i = 0; i < 8; ++i) {
      const int gi = DofMap::vector_dof(nodes[i / 2], i % 2);
      load[gi] += fe_load[i];
      for (int j = 0; j < 8; ++j)
        trips.emplace_back(gi, DofMap::vector_dof(nodes[j / 2], j % 2), Ke(i, j));
    }
  }
  return {assemble_from_triplets(trips, ndof, ndof), load};
}

CouplingBlocks assemble_coupling(const Mesh& mesh, const MaterialTable& t, const Vector& phi) {
  const int nn = mesh.num_nodes();
  const double wq = q1::weight(mesh);
  const auto& N = q1::reference().N;
  auto tb = reserve_triplets(mesh, 32);
  auto td = reserve_triplets(mesh, 16);
  auto tc = reserve_triplets(mesh, 32);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements[e];
    const auto fe = q1::gather(mesh, e, phi);
    Eigen::Matrix<double, 8, 4> Be = Eigen::Matrix<double, 8, 4>::Zero();
    Eigen::Matrix4d De = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 8> Ce = Eigen::Matrix<double, 4, 8>::Zero();
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      const double alpha = biot_willis(t, ph).value;
      const double M = compressibility(t, ph).value;
      for (int a = 0; a < 4; ++a) {
        const Eigen::Vector2d g = q1::basis_gradient(mesh, q, a);
        for (int b = 0; b < 4; ++b) {
          De(a, b) += wq * M * N[q][a] * N[q][b];
          for (int c = 0; c < 2; ++c) {
            Be(2 * a + c, b) += wq * alpha * g[c] * N[q][b];
            Ce(b, 2 * a + c) += wq * M * alpha * g[c] * N[q][b];
          }
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        td.emplace_back(nodes[a], nodes[b], De(a, b));
        for (int c = 0; c < 2; ++c) {
          tb.emplace_back(DofMap::vector_dof(nodes[a], c), nodes[b], Be(2 * a + c, b));
          tc.emplace_back(nodes[b], DofMap::vector_dof(nodes[a], c), Ce(b, 2 * a + c));
        }
      }
    }
  }
  return {assemble_from_triplets(tb, 2 * nn, nn), assemble_from_triplets(td, nn, nn),
          assemble_from_triplets(tc, nn, 2 * nn)};
}

Vector stress_residual(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                       const Vector& u, const Vector& theta) {
  Vector r = Vector::Zero(2 * mesh.num_nodes());
  const double wq = q1::weight(mesh);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& nodes = mesh.elements[e];
    const auto fe = q1::gather(mesh, e, phi);
    const auto te = q1::gather(mesh, e, theta);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      const double alpha = biot_willis(t, ph).value;
      const double div = q1::divergence(mesh, q, ue);
      const double pressure = compressibility(t, ph).value * (q1::value(q, te) - alpha * div);
      const Tensor2<double> sigma =
          apply_elasticity_tensor(t, ph, Tensor2<double>(q1::strain(mesh, q, ue) - eigenstrain(t, ph))) -
          alpha * pressure * Tensor2<double>::Identity();
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c)
          r[DofMap::vector_dof(nodes[a], c)] += wq * contract(sigma, q1::basis_strain(mesh, q, a, c));
    }
  }
  return r;
}

}  // namespace chb
