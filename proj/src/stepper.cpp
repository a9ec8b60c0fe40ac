#include "chb/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chb {

void TimeStepConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be nonnegative");
  if (t_final > 0.0 && dt > t_final * (1.0 + 1e-12)) {
    throw std::invalid_argument("dt must not exceed t_final");
  }
  if (!(decoupling_tol > 0.0) || !(newton_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (decoupling_max_iters < 1 || newton_max_iters < 1) {
    throw std::invalid_argument("iteration caps must be >= 1");
  }
}

namespace {

void append_block(std::vector<Triplet>& trips, const SparseMatrix& A, int row0, int col0,
                  double scale = 1.0) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      trips.emplace_back(row0 + r, col0 + static_cast<int>(it.col()), scale * it.value());
}

double relative_change(const Vector& next, const Vector& prev) {
  return (next - prev).norm() / (next.norm() + 1e-12);
}

bool all_finite(const State& s) {
  return s.phi.allFinite() && s.mu.allFinite() && s.u.allFinite() && s.theta.allFinite() &&
         s.p.allFinite();
}

/// Coupling part of the chemical potential: load (dE/dphi, N_i) and the
/// Gauss-point second derivative d^2E/dphi^2 for the Jacobian.
struct CouplingTerms {
  Vector load;
  q1::QuadField curvature;
};

CouplingTerms coupling_terms(const Mesh& mesh, const MaterialTable& t, Model model,
                             const Vector& phi, const Vector& u, const Vector& theta) {
  CouplingTerms out{Vector::Zero(mesh.num_nodes()),
                    q1::QuadField::Zero(mesh.num_elements(), q1::kPoints)};
  if (!has_mechanics(model)) return out;
  q1::QuadField first(mesh.num_elements(), q1::kPoints);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, phi);
    const auto ue = q1::gather_vector(mesh, e, u);
    const auto te = q1::gather(mesh, e, theta);
    for (int q = 0; q < q1::kPoints; ++q) {
      const double ph = q1::value(q, fe);
      PointDerivatives d = elastic_density(t, ph, q1::strain(mesh, q, ue));
      if (has_flow(model)) {
        const PointDerivatives f =
            fluid_density(t, ph, q1::value(q, te), q1::divergence(mesh, q, ue));
        d.dphi += f.dphi;
        d.dphi2 += f.dphi2;
      }
      first(e, q) = d.dphi;
      out.curvature(e, q) = d.dphi2;
    }
  }
  out.load = q1::load(mesh, first);
  return out;
}

}  // namespace

Simulator::Simulator(Mesh mesh, MaterialTable material, TimeStepConfig cfg)
    : mesh_(std::move(mesh)),
      dofs_(build_dofmap(mesh_)),
      material_(cfg.constant_coefficients ? constant_coefficient_table(material) : material),
      cfg_(cfg),
      mass_(assemble_scalar_mass(mesh_)),
      laplacian_(assemble_weighted_stiffness(mesh_, 1.0)) {
  cfg_.validate();
  material_.validate();
}

int Simulator::num_steps() const {
  const double ratio = cfg_.t_final / cfg_.dt;
  const long steps = std::lround(ratio);
  if (std::abs(steps * cfg_.dt - cfg_.t_final) > 1e-9 * std::max(1.0, cfg_.t_final)) {
    throw std::invalid_argument("t_final is not an integer multiple of dt");
  }
  return static_cast<int>(steps);
}

// ---------------------------------------------------------------------------
// Flow-mechanics block

Simulator::LinearSystem Simulator::elasticity_system(const State& old, const Vector& phi,
                                                     double dt) const {
  ElasticitySystem el = assemble_elasticity(mesh_, material_, phi, dt, old.u);
  LinearSystem sys{std::move(el.op), std::move(el.load)};
  constrain_homogeneous(sys.A, sys.b, dofs_.dirichlet_mask);
  return sys;
}

Simulator::LinearSystem Simulator::flow_mechanics_system(const State& old, const Vector& phi,
                                                         double dt) const {
  const int nn = mesh_.num_nodes();
  const int ou = 0, oth = 2 * nn, op = 3 * nn, size = 4 * nn;
  const ElasticitySystem el = assemble_elasticity(mesh_, material_, phi, dt, old.u);
  const CouplingBlocks cb = assemble_coupling(mesh_, material_, phi);
  const SparseMatrix perm = assemble_weighted_stiffness(
      mesh_, coefficient(mesh_, phi, [&](double x) { return permeability(material_, x).value; }));

  std::vector<Triplet> trips;
  trips.reserve(el.op.nonZeros() + 2 * cb.B.nonZeros() + cb.D.nonZeros() +
                3 * mass_.nonZeros() + perm.nonZeros());
  // (C_v/dt + C(phi)) eps(u) : eps(v) - (alpha p, div v)
  append_block(trips, el.op, ou, ou);
  append_block(trips, cb.B, ou, op, -1.0);
  // (theta - theta_old)/dt + (kappa grad p, grad zeta) = S_theta
  append_block(trips, mass_, oth, oth, 1.0 / dt);
  append_block(trips, perm, oth, op);
  // (p, zeta) - (M theta, zeta) + (M alpha div u, zeta) = 0
  append_block(trips, cb.closure_div, op, ou);
  append_block(trips, cb.D, op, oth, -1.0);
  append_block(trips, mass_, op, op);

  LinearSystem sys{assemble_from_triplets(trips, size, size), Vector::Zero(size)};
  sys.b.segment(ou, 2 * nn) = el.load;
  sys.b.segment(oth, nn) =
      mass_ * old.theta / dt + material_.source_theta * q1::lumped_mass(mesh_);

  std::vector<std::uint8_t> mask(size, 0);
  std::copy(dofs_.dirichlet_mask.begin(), dofs_.dirichlet_mask.end(), mask.begin());
  constrain_homogeneous(sys.A, sys.b, mask);
  return sys;
}

// Jacobi-preconditioned BiCGSTAB stalls on both coupled blocks once h is
// small (the theta-p and phi-mu couplings put eigenvalues far off the real
// axis). The LU factors of an earlier system are kept as the preconditioner
// and refreshed whenever they stop being effective.
SolveResult Simulator::solve_cached(FactoredPreconditioner& precond, const SparseMatrix& A,
                                    const Vector& b, const Vector& guess) const {
  constexpr int kStaleLimit = 30;
  if (precond.ready() && precond.size() == A.rows()) {
    SolverConfig cfg = cfg_.linear;
    cfg.max_iterations = kStaleLimit;
    try {
      return solve_general(A, b, precond.action(), cfg, guess);
    } catch (const SolverError&) {
    }
  }
  precond.factor(A);
  return solve_general(A, b, precond.action(), cfg_.linear, guess);
}

FlowMechanicsResult Simulator::step_flow_mechanics(const State& old, const Vector& phi,
                                                   double dt, const State* guess) const {
  if (!has_mechanics(cfg_.model)) {
    throw std::invalid_argument("flow-mechanics block requested for the CH model");
  }
  const int nn = mesh_.num_nodes();
  FlowMechanicsResult out;
  if (!has_flow(cfg_.model)) {
    const LinearSystem sys = elasticity_system(old, phi, dt);
    const SolveResult sol = solve_spd(sys.A, sys.b, cfg_.linear, guess ? guess->u : Vector());
    out.u = sol.x;
    out.theta = old.theta;
    out.p = Vector::Zero(nn);
    out.stats = sol.stats;
  } else {
    const LinearSystem sys = flow_mechanics_system(old, phi, dt);
    Vector x0;
    if (guess) {
      x0.resize(4 * nn);
      x0 << guess->u, guess->theta, guess->p;
    }
    const SolveResult sol = solve_cached(flow_precond_, sys.A, sys.b, x0);
    out.u = sol.x.segment(0, 2 * nn);
    out.theta = sol.x.segment(2 * nn, nn);
    out.p = sol.x.segment(3 * nn, nn);
    out.stats = sol.stats;
  }
  // elimination leaves exact zeros, but the Krylov update may not
  for (int i = 0; i < dofs_.num_vector; ++i)
    if (dofs_.dirichlet_mask[i]) out.u[i] = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Cahn-Hilliard block

Simulator::CachedLoads Simulator::lagged_terms(const State& old) const {
  CachedLoads c;
  c.mobility_stiffness = assemble_weighted_stiffness(
      mesh_, coefficient(mesh_, old.phi, [&](double x) { return mobility(material_, x); }));
  c.source = q1::load(
      mesh_, coefficient(mesh_, old.phi, [&](double x) { return source_phi(material_, x); }));
  c.explicit_well = q1::load(
      mesh_, coefficient(mesh_, old.phi, [](double x) { return double_well_prime_expansive(x); }));
  return c;
}

Vector Simulator::residual_with(const CachedLoads& lagged, const State& old, const Vector& u,
                                const Vector& theta, const Vector& phi, const Vector& mu,
                                double dt) const {
  const int nn = mesh_.num_nodes();
  const CouplingTerms coupling = coupling_terms(mesh_, material_, cfg_.model, phi, u, theta);
  Vector r(2 * nn);
  r.head(nn) = mass_ * (phi - old.phi) / dt + lagged.mobility_stiffness * mu - lagged.source;
  r.tail(nn) = -(mass_ * mu) + material_.gamma * (laplacian_ * phi) +
               kContractiveSlope * (mass_ * phi) + lagged.explicit_well + coupling.load;
  return r;
}

Vector Simulator::cahn_hilliard_residual(const State& old, const Vector& u, const Vector& theta,
                                         const Vector& phi, const Vector& mu, double dt) const {
  return residual_with(lagged_terms(old), old, u, theta, phi, mu, dt);
}

SparseMatrix Simulator::cahn_hilliard_jacobian(const State& old, const Vector& u,
                                               const Vector& theta, const Vector& phi,
                                               double dt) const {
  const int nn = mesh_.num_nodes();
  const SparseMatrix mob = assemble_weighted_stiffness(
      mesh_, coefficient(mesh_, old.phi, [&](double x) { return mobility(material_, x); }));
  const CouplingTerms coupling = coupling_terms(mesh_, material_, cfg_.model, phi, u, theta);
  std::vector<Triplet> trips;
  trips.reserve(6 * mass_.nonZeros());
  append_block(trips, mass_, 0, 0, 1.0 / dt);
  append_block(trips, mob, 0, nn);
  append_block(trips, laplacian_, nn, 0, material_.gamma);
  append_block(trips, mass_, nn, 0, kContractiveSlope);
  if (has_mechanics(cfg_.model)) {
    append_block(trips, assemble_weighted_mass(mesh_, coupling.curvature), nn, 0);
  }
  append_block(trips, mass_, nn, nn, -1.0);
  return assemble_from_triplets(trips, 2 * nn, 2 * nn);
}

CahnHilliardResult Simulator::step_cahn_hilliard_newton(const State& old, const Vector& u,
                                                        const Vector& theta, double dt,
                                                        const State* guess) const {
  const int nn = mesh_.num_nodes();
  const CachedLoads lagged = lagged_terms(old);
  CahnHilliardResult out{guess ? guess->phi : old.phi, guess ? guess->mu : old.mu, {}};
  for (int it = 0;; ++it) {
    const Vector r = residual_with(lagged, old, u, theta, out.phi, out.mu, dt);
    const double norm = r.norm();
    out.newton.residuals.push_back(norm);
    if (!std::isfinite(norm)) break;
    if (norm <= cfg_.newton_tol) return out;
    if (it == cfg_.newton_max_iters) break;
    const SparseMatrix J = cahn_hilliard_jacobian(old, u, theta, out.phi, dt);
    const SolveResult step = solve_cached(ch_precond_, J, -r, Vector());
    out.newton.linear_iterations += step.stats.iterations;
    out.phi += step.x.head(nn);
    out.mu += step.x.tail(nn);
    ++out.newton.iterations;
  }
  DecouplingReport report;
  report.newton_iterations_per_outer.push_back(out.newton.iterations);
  throw StepFailure("Newton did not converge (residual " +
                        std::to_string(out.newton.residuals.back()) + ")",
                    report);
}

// ---------------------------------------------------------------------------
// Decoupling loop and time loop

std::pair<State, DecouplingReport> Simulator::advance(const State& old, double dt) const {
  DecouplingReport report;
  State iter = old;
  bool converged = false;
  for (int k = 1; k <= cfg_.decoupling_max_iters; ++k) {
    Vector u = old.u, theta = old.theta, p = old.p;
    if (has_mechanics(cfg_.model)) {
      FlowMechanicsResult fm = step_flow_mechanics(old, iter.phi, dt, &iter);
      report.linear_iterations += fm.stats.iterations;
      report.max_linear_residual = std::max(report.max_linear_residual, fm.stats.residual);
      u = std::move(fm.u);
      theta = std::move(fm.theta);
      p = std::move(fm.p);
    }
    CahnHilliardResult ch = step_cahn_hilliard_newton(old, u, theta, dt, &iter);
    report.linear_iterations += ch.newton.linear_iterations;
    report.newton_iterations_per_outer.push_back(ch.newton.iterations);

    const double change = std::max({relative_change(ch.phi, iter.phi),
                                    relative_change(u, iter.u), relative_change(p, iter.p)});
    iter.phi = std::move(ch.phi);
    iter.mu = std::move(ch.mu);
    iter.u = std::move(u);
    iter.theta = std::move(theta);
    iter.p = std::move(p);
    report.outer_iterations = k;
    report.final_relative_change = change;
    report.relative_changes.push_back(change);
    if (!all_finite(iter)) break;
    if (cfg_.model == Model::ch || change < cfg_.decoupling_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw StepFailure("decoupling iteration did not converge (relative change " +
                          std::to_string(report.final_relative_change) + ")",
                      report);
  }
  iter.time = old.time + dt;
  return {std::move(iter), std::move(report)};
}

State Simulator::run(const State& initial, const StepObserver& observer) const {
  const int steps = num_steps();
  State state = initial;
  if (observer) observer(0, state, DecouplingReport{});
  for (int k = 1; k <= steps; ++k) {
    const double t_target = initial.time + k * cfg_.dt;
    DecouplingReport report;
    try {
      std::tie(state, report) = advance(state, cfg_.dt);
    } catch (const std::runtime_error&) {
      try {
        auto [half, r1] = advance(state, 0.5 * cfg_.dt);
        auto [full, r2] = advance(half, 0.5 * cfg_.dt);
        report = r2;
        report.outer_iterations += r1.outer_iterations;
        report.linear_iterations += r1.linear_iterations;
        state = std::move(full);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("step " + std::to_string(k) + " failed after halving dt: " +
                                 e.what());
      }
    }
    state.time = t_target;
    if (observer) observer(k, state, report);
  }
  return state;
}

}  // namespace chb
