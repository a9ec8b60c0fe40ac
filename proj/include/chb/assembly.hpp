#pragma once

#include "chb/material.hpp"
#include "chb/q1.hpp"

namespace chb {

/// (N_j, N_i), consistent, 2x2 Gauss.
SparseMatrix assemble_scalar_mass(const Mesh& mesh);
/// (w N_j, N_i) for a Gauss-point coefficient.
SparseMatrix assemble_weighted_mass(const Mesh& mesh, const q1::QuadField& w);
/// (w grad N_j, grad N_i) for a Gauss-point coefficient.
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const q1::QuadField& w);
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, double w);

/// Law evaluated on the Q1 interpolant of phi at every Gauss point.
template <class Law>
q1::QuadField coefficient(const Mesh& mesh, const Vector& phi, Law&& law) {
  q1::QuadField w = q1::at_quadrature(mesh, phi);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = law(w.data()[i]);
  return w;
}

/// Backward-Euler viscoelastic + elastic operator on vector dofs,
///   (C_v eps(u), eps(v)) / dt + (C(phi) eps(u), eps(v)),
/// and its load
///   (C(phi) T(phi), eps(v)) + (C_v eps(u_old), eps(v)) / dt + (S_u, v).
/// Dirichlet constraints are not applied here.
struct ElasticitySystem {
  SparseMatrix op;
  Vector load;
};

ElasticitySystem assemble_elasticity(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                                     double dt, const Vector& u_old);

/// Pressure-displacement coupling.
///   B           (2N x N):  B[(i,c), j]      = (alpha(phi) N_j, d_c N_i)
///   D           (N x N):   D[i, j]          = (M(phi) N_j, N_i)
///   closure_div (N x 2N):  closure_div[i, (j,c)] = (M(phi) alpha(phi) d_c N_j, N_i)
/// The (alpha div u, zeta) block is B^T by construction.
struct CouplingBlocks {
  SparseMatrix B;
  SparseMatrix D;
  SparseMatrix closure_div;
};

CouplingBlocks assemble_coupling(const Mesh& mesh, const MaterialTable& t, const Vector& phi);

/// (C(phi)(eps(u) - T(phi)) - alpha(phi) P I, eps(v)) with the pressure
/// P = M(phi)(theta - alpha(phi) div u) taken pointwise; the derivative of
/// E_u + E_theta with respect to u.
Vector stress_residual(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                       const Vector& u, const Vector& theta);

}  // namespace chb
