#pragma once

#include "chb/material.hpp"
#include "chb/q1.hpp"
#include "chb/state.hpp"

namespace chb {

/// Free-energy split E = E_phi + E_u + E_theta together with the two
/// dissipation densities reported alongside it.
struct EnergyReport {
  double E_phi = 0.0;
  double E_u = 0.0;
  double E_theta = 0.0;
  double total = 0.0;
  double grad_mu_norm_sq = 0.0;
  double grad_p_norm_sq = 0.0;
};

enum class EnergyComponent { surface, elastic, fluid };

// Pointwise densities with their first two phase derivatives at fixed strain
// and fluid content.

struct PointDerivatives {
  double value = 0.0, dphi = 0.0, dphi2 = 0.0;
};

/// W = 1/2 (eps - T):C(eps - T);  dW/dphi = 1/2 e:C'e - T':C e.
PointDerivatives elastic_density(const MaterialTable& t, double phi, const Tensor2<double>& eps);
/// F = M/2 (theta - alpha div u)^2;  dF/dphi = M'/2 w^2 - M w alpha' div u.
PointDerivatives fluid_density(const MaterialTable& t, double phi, double theta, double div_u);

double energy_surface(const Mesh& mesh, const MaterialTable& t, const Vector& phi);
double energy_elastic(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                      const Vector& u);
double energy_fluid(const Mesh& mesh, const MaterialTable& t, const Vector& phi, const Vector& u,
                    const Vector& theta);
double energy(EnergyComponent c, const Mesh& mesh, const MaterialTable& t, const State& s);

/// Components that are not part of `model` are reported as zero: the plain
/// Cahn-Hilliard energy is E_phi alone and Cahn-Larche has no fluid energy.
EnergyReport energy_report(const Mesh& mesh, const MaterialTable& t, const State& s,
                           Model model = Model::chb);

/// Load vectors (dE/dphi, N_i) of the coupling terms in the chemical potential.
Vector dphi_elastic_load(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                         const Vector& u);
Vector dphi_fluid_load(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                       const Vector& u, const Vector& theta);

/// Nodal variational derivatives with respect to the lumped L2 product.
Vector dphi_energy_elastic(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                           const Vector& u);
Vector dphi_energy_fluid(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                         const Vector& u, const Vector& theta);

/// p = M(phi)(theta - alpha(phi) div u), L2-projected onto Q1 with the
/// consistent mass matrix.
Vector pressure_closure(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                        const Vector& theta, const Vector& u);

/// Perturbation direction for directional derivatives. Empty members are zero.
struct Direction {
  Vector phi, u, theta;
};

/// <dE, v>: the exact derivative of the discrete energy along v.
double directional_derivative(EnergyComponent c, const Mesh& mesh, const MaterialTable& t,
                              const State& s, const Direction& v);

/// |<dE, v> - (E(s + h v) - E(s - h v)) / 2h| / max(1, |<dE, v>|).
double fd_validate(EnergyComponent c, const Mesh& mesh, const MaterialTable& t, const State& s,
                   const Direction& v, double step);

}  // namespace chb
