#pragma once

#include "chb/assembly.hpp"
#include "chb/energy.hpp"
#include "chb/state.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace chb {

struct TimeStepConfig {
  double dt = 1.0 / 128.0;
  double t_final = 1.5;
  Model model = Model::chb;
  double decoupling_tol = 1e-6;
  int decoupling_max_iters = 50;
  double newton_tol = 1e-9;
  int newton_max_iters = 25;
  /// Replace the material laws by the constant-coefficient regime.
  bool constant_coefficients = false;
  SolverConfig linear;

  void validate() const;
};

struct FlowMechanicsResult {
  Vector u, theta, p;
  SolveStats stats;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residuals;  // ||R|| before each update, then the final one
  int linear_iterations = 0;
};

struct CahnHilliardResult {
  Vector phi, mu;
  NewtonReport newton;
};

struct DecouplingReport {
  int outer_iterations = 0;
  double final_relative_change = 0.0;
  std::vector<double> relative_changes;
  std::vector<int> newton_iterations_per_outer;
  int linear_iterations = 0;
  double max_linear_residual = 0.0;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, DecouplingReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const DecouplingReport& report() const { return report_; }

 private:
  DecouplingReport report_;
};

/// Called with the step index (0 for the initial state), the state and the
/// report of the step that produced it.
using StepObserver = std::function<void(int, const State&, const DecouplingReport&)>;

/// Time integrator for the coupled system on a fixed mesh.
///
/// One step solves the flow-mechanics block for (u, theta, p) with phi frozen
/// at the current outer iterate, then the Cahn-Hilliard block for (phi, mu)
/// by Newton with (u, theta) frozen, and repeats until the relative change of
/// (phi, u, p) falls below `decoupling_tol`.
///
/// Time discretization: backward Euler for every rate term; Psi_c' implicit,
/// Psi_e' explicit at phi^n; mobility m(phi^n) and source S_phi(C(phi^n))
/// lagged; the coupling derivatives dE_u/dphi, dE_theta/dphi implicit in phi.
class Simulator {
 public:
  Simulator(Mesh mesh, MaterialTable material, TimeStepConfig cfg);

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const MaterialTable& material() const { return material_; }
  const TimeStepConfig& config() const { return cfg_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& laplacian() const { return laplacian_; }

  /// Monolithic (u, theta, p) system with unknowns ordered [u | theta | p],
  /// Dirichlet rows already eliminated.
  struct LinearSystem {
    SparseMatrix A;
    Vector b;
  };
  LinearSystem flow_mechanics_system(const State& old, const Vector& phi, double dt) const;
  LinearSystem elasticity_system(const State& old, const Vector& phi, double dt) const;

  FlowMechanicsResult step_flow_mechanics(const State& old, const Vector& phi, double dt,
                                          const State* guess = nullptr) const;

  /// Nonlinear residual of the two Cahn-Hilliard rows, stacked [phi | mu].
  Vector cahn_hilliard_residual(const State& old, const Vector& u, const Vector& theta,
                                const Vector& phi, const Vector& mu, double dt) const;
  /// Analytic Jacobian of cahn_hilliard_residual with respect to [phi | mu].
  SparseMatrix cahn_hilliard_jacobian(const State& old, const Vector& u, const Vector& theta,
                                      const Vector& phi, double dt) const;

  CahnHilliardResult step_cahn_hilliard_newton(const State& old, const Vector& u,
                                               const Vector& theta, double dt,
                                               const State* guess = nullptr) const;

  std::pair<State, DecouplingReport> advance(const State& old) const { return advance(old, cfg_.dt); }
  std::pair<State, DecouplingReport> advance(const State& old, double dt) const;

  /// Fixed-step loop to t_final. A failed step is retried once as two half
  /// steps; a second failure aborts with the step index.
  State run(const State& initial, const StepObserver& observer = {}) const;

  /// Number of steps implied by (dt, t_final).
  int num_steps() const;

 private:
  struct CachedLoads {
    SparseMatrix mobility_stiffness;
    Vector source, explicit_well;
  };
  CachedLoads lagged_terms(const State& old) const;
  Vector residual_with(const CachedLoads& lagged, const State& old, const Vector& u,
                       const Vector& theta, const Vector& phi, const Vector& mu,
                       double dt) const;
  SolveResult solve_cached(FactoredPreconditioner& precond, const SparseMatrix& A,
                           const Vector& b, const Vector& guess) const;

  Mesh mesh_;
  DofMap dofs_;
  MaterialTable material_;
  TimeStepConfig cfg_;
  SparseMatrix mass_;
  SparseMatrix laplacian_;
  mutable FactoredPreconditioner flow_precond_;
  mutable FactoredPreconditioner ch_precond_;
};

}  // namespace chb
