#include "chb/energy.hpp"

#include "chb/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace chb {

PointDerivatives elastic_density(const MaterialTable& t, double phi, const Tensor2<double>& eps) {
  const Tensor2<double> e = eps - eigenstrain(t, phi);
  const Tensor2<double> Tp = eigenstrain_prime<double>(t);
  const Tensor2<double> Ce = apply_elasticity_tensor(t, phi, e);
  const Tensor2<double> dCe = elasticity_tensor_phi_derivative(t, phi, e);
  const Tensor2<double> ddCe = elasticity_tensor_phi_second_derivative(t, phi, e);
  const Tensor2<double> CTp = apply_elasticity_tensor(t, phi, Tp);
  PointDerivatives out;
  out.value = 0.5 * contract(e, Ce);
  out.dphi = 0.5 * contract(e, dCe) - contract(Tp, Ce);
  out.dphi2 = 0.5 * contract(e, ddCe) - 2.0 * contract(Tp, dCe) + contract(Tp, CTp);
  return out;
}

PointDerivatives fluid_density(const MaterialTable& t, double phi, double theta, double div_u) {
  const auto M = compressibility(t, phi);
  const auto a = biot_willis(t, phi);
  const double w = theta - a.value * div_u;
  PointDerivatives out;
  out.value = 0.5 * M.value * w * w;
  out.dphi = 0.5 * M.d1 * w * w - M.value * w * a.d1 * div_u;
  out.dphi2 = 0.5 * M.d2 * w * w - 2.0 * M.d1 * a.d1 * w * div_u +
              M.value * a.d1 * a.d1 * div_u * div_u - M.value * w * a.d2 * div_u;
  return out;
}

double energy_surface(const Mesh& mesh, const MaterialTable& t, const Vector& phi) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    for (int q = 0; q < q1::kPoints; ++q) {
      sum += double_well(q1::value(q, fe)) +
             0.5 * t.gamma * q1::gradient(mesh, q, fe).squaredNorm();
    }
  }
  return q1::weight(mesh) * sum;
}

double energy_elastic(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                      const Vector& u) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      sum += elastic_density(t, q1::value(q, fe), q1::strain(mesh, q, ue)).value;
    }
  }
  return q1::weight(mesh) * sum;
}

double energy_fluid(const Mesh& mesh, const MaterialTable& t, const Vector& phi, const Vector& u,
                    const Vector& theta) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto te = q1::gather(mesh, e, theta);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      sum += fluid_density(t, q1::value(q, fe), q1::value(q, te), q1::divergence(mesh, q, ue))
                 .value;
    }
  }
  return q1::weight(mesh) * sum;
}

double energy(EnergyComponent c, const Mesh& mesh, const MaterialTable& t, const State& s) {
  switch (c) {
    case EnergyComponent::surface:
      return energy_surface(mesh, t, s.phi);
    case EnergyComponent::elastic:
      return energy_elastic(mesh, t, s.phi, s.u);
    case EnergyComponent::fluid:
      return energy_fluid(mesh, t, s.phi, s.u, s.theta);
  }
  return 0.0;
}

namespace {

double gradient_norm_sq(const Mesh& mesh, const Vector& f) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, f);
    for (int q = 0; q < q1::kPoints; ++q) sum += q1::gradient(mesh, q, fe).squaredNorm();
  }
  return q1::weight(mesh) * sum;
}

}  // namespace

EnergyReport energy_report(const Mesh& mesh, const MaterialTable& t, const State& s,
                           Model model) {
  EnergyReport r;
  r.E_phi = energy_surface(mesh, t, s.phi);
  if (has_mechanics(model)) r.E_u = energy_elastic(mesh, t, s.phi, s.u);
  if (has_flow(model)) r.E_theta = energy_fluid(mesh, t, s.phi, s.u, s.theta);
  r.total = r.E_phi + r.E_u + r.E_theta;
  r.grad_mu_norm_sq = gradient_norm_sq(mesh, s.mu);
  r.grad_p_norm_sq = gradient_norm_sq(mesh, s.p);
  return r;
}

Vector dphi_elastic_load(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                         const Vector& u) {
  q1::QuadField g(mesh.num_elements(), q1::kPoints);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      g(e, q) = elastic_density(t, q1::value(q, fe), q1::strain(mesh, q, ue)).dphi;
    }
  }
  return q1::load(mesh, g);
}

Vector dphi_fluid_load(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                       const Vector& u, const Vector& theta) {
  q1::QuadField g(mesh.num_elements(), q1::kPoints);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto te = q1::gather(mesh, e, theta);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      g(e, q) =
          fluid_density(t, q1::value(q, fe), q1::value(q, te), q1::divergence(mesh, q, ue)).dphi;
    }
  }
  return q1::load(mesh, g);
}

Vector dphi_energy_elastic(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                           const Vector& u) {
  return dphi_elastic_load(mesh, t, phi, u).cwiseQuotient(q1::lumped_mass(mesh));
}

Vector dphi_energy_fluid(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                         const Vector& u, const Vector& theta) {
  return dphi_fluid_load(mesh, t, phi, u, theta).cwiseQuotient(q1::lumped_mass(mesh));
}

Vector pressure_closure(const Mesh& mesh, const MaterialTable& t, const Vector& phi,
                        const Vector& theta, const Vector& u) {
  q1::QuadField g(mesh.num_elements(), q1::kPoints);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto te = q1::gather(mesh, e, theta);
    const auto ue = q1::gather_vector(mesh, e, u);
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      g(e, q) = compressibility(t, ph).value *
                (q1::value(q, te) - biot_willis(t, ph).value * q1::divergence(mesh, q, ue));
    }
  }
  SolverConfig cfg;
  cfg.relative_tolerance = 1e-13;
  cfg.absolute_tolerance = 1e-300;
  return solve_spd(assemble_scalar_mass(mesh), q1::load(mesh, g), cfg).x;
}

double directional_derivative(EnergyComponent c, const Mesh& mesh, const MaterialTable& t,
                              const State& s, const Direction& v) {
  const Eigen::Index nn = mesh.num_nodes();
  const Vector vphi = v.phi.size() ? v.phi : Vector::Zero(nn);
  const Vector vu = v.u.size() ? v.u : Vector::Zero(2 * nn);
  const Vector vtheta = v.theta.size() ? v.theta : Vector::Zero(nn);
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, s.phi);
    const auto dfe = q1::gather(mesh, e, vphi);
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      const double dph = q1::value(q, dfe);
      switch (c) {
        case EnergyComponent::surface:
          sum += double_well_prime(ph) * dph +
                 t.gamma * q1::gradient(mesh, q, fe).dot(q1::gradient(mesh, q, dfe));
          break;
        case EnergyComponent::elastic: {
          const Tensor2<double> eps = q1::strain(mesh, q, q1::gather_vector(mesh, e, s.u));
          const Tensor2<double> deps = q1::strain(mesh, q, q1::gather_vector(mesh, e, vu));
          const Tensor2<double> stress =
              apply_elasticity_tensor(t, ph, Tensor2<double>(eps - eigenstrain(t, ph)));
          sum += elastic_density(t, ph, eps).dphi * dph + contract(stress, deps);
          break;
        }
        case EnergyComponent::fluid: {
          const double div = q1::divergence(mesh, q, q1::gather_vector(mesh, e, s.u));
          const double ddiv = q1::divergence(mesh, q, q1::gather_vector(mesh, e, vu));
          const double th = q1::value(q, q1::gather(mesh, e, s.theta));
          const double dth = q1::value(q, q1::gather(mesh, e, vtheta));
          const double alpha = biot_willis(t, ph).value;
          const double pressure = compressibility(t, ph).value * (th - alpha * div);
          sum += fluid_density(t, ph, th, div).dphi * dph + pressure * (dth - alpha * ddiv);
          break;
        }
      }
    }
  }
  return q1::weight(mesh) * sum;
}

double fd_validate(EnergyComponent c, const Mesh& mesh, const MaterialTable& t, const State& s,
                   const Direction& v, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_validate: step must be positive");
  auto shifted = [&](double h) {
    State x = s;
    if (v.phi.size()) x.phi += h * v.phi;
    if (v.u.size()) x.u += h * v.u;
    if (v.theta.size()) x.theta += h * v.theta;
    return energy(c, mesh, t, x);
  };
  const double analytic = directional_derivative(c, mesh, t, s, v);
  const double fd = (shifted(step) - shifted(-step)) / (2.0 * step);
  return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

}  // namespace chb
