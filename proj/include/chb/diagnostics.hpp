#pragma once

#include "chb/energy.hpp"
#include "chb/stepper.hpp"

#include <array>
#include <optional>
#include <vector>

namespace chb {

struct TimeSeriesRow {
  double time = 0.0;
  double tumor_mass = 0.0;
  double E_phi = 0.0, E_u = 0.0, E_theta = 0.0, E_total = 0.0;
  double grad_mu_norm_sq = 0.0, grad_p_norm_sq = 0.0;
  int outer_iterations = 0;
};

/// Integral of phi over the unit square.
double tumor_mass(const Mesh& mesh, const Vector& phi);

TimeSeriesRow make_row(const Mesh& mesh, const MaterialTable& t, Model model, const State& s,
                       int outer_iterations);

// ---------------------------------------------------------------------------
// Discrete norms

double l2_norm_sq(const Mesh& mesh, const Vector& f);
double h1_seminorm_sq(const Mesh& mesh, const Vector& f);
double h1_norm_sq(const Mesh& mesh, const Vector& f);
/// Interleaved vector field, summed over components.
double vector_l2_norm_sq(const Mesh& mesh, const Vector& u);
double vector_h1_norm_sq(const Mesh& mesh, const Vector& u);
/// Squared (H^1)' norm: ||grad w||^2 + mean(f)^2 where -Laplace w = f - mean(f)
/// with homogeneous Neumann data.
double dual_norm_sq(const Mesh& mesh, const Vector& f);

// ---------------------------------------------------------------------------
// Energy-inequality monitor

/// Pointwise-in-time quantities of the energy inequality at one output time.
/// `dt` is the time since the previous sample (0 for the first).
struct InequalitySample {
  double time = 0.0;
  double dt = 0.0;
  double phi_h1_sq = 0.0;
  double mu_h1_sq = 0.0;
  double p_h1_sq = 0.0;
  double p_l2_sq = 0.0;
  double psi_l1 = 0.0;
  double u_h1_sq = 0.0;
  double u_rate_h1_sq = 0.0;  // ||(u - u_prev) / dt||_{H^1}^2
};

InequalitySample inequality_sample(const Mesh& mesh, const State& s, const State* previous);

struct InequalityReport {
  double data_functional = 0.0;  // 1 + ||phi0||_{H^1}^2 + ||u0||^2 + ||theta0||^2
  std::vector<double> lhs;       // aggregate at each sample time
  double max_lhs = 0.0;
  double ratio = 0.0;  // max_lhs / data_functional
  double threshold = 1e4;
  bool bounded = false;
};

/// The time-integrated terms are accumulated with the right-endpoint rule.
/// A non-finite sample makes the report unbounded.
InequalityReport energy_inequality_monitor(const std::vector<InequalitySample>& samples,
                                           const Mesh& mesh, const State& initial,
                                           double threshold = 1e4);

// ---------------------------------------------------------------------------
// Contours

struct ContourSet {
  double level = 0.0;
  /// Closed polylines repeat their first point at the end.
  std::vector<std::vector<Eigen::Vector2d>> polylines;
  /// Pieces of the domain boundary where the field exceeds the level. With
  /// the polylines they bound the inside region.
  std::vector<std::array<Eigen::Vector2d, 2>> boundary;
};

/// Marching squares on the nodal grid. A node counts as inside when its value
/// exceeds `level`; saddle cells are split according to the cell average.
ContourSet marching_squares(const Mesh& mesh, const Vector& field, double level);

double contour_length(const ContourSet& c);
bool is_closed(const std::vector<Eigen::Vector2d>& polyline);
/// Even-odd rule over the polylines and the inside boundary pieces.
bool contains(const ContourSet& c, const Eigen::Vector2d& x);
/// Every mesh node enclosed by `inner` is enclosed by `outer`.
bool nested(const Mesh& mesh, const ContourSet& inner, const ContourSet& outer);

// ---------------------------------------------------------------------------
// Post-processed fields

/// q = -kappa(phi) grad p at each element center.
std::vector<Eigen::Vector2d> darcy_velocity(const Mesh& mesh, const MaterialTable& t,
                                            const Vector& phi, const Vector& p);

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Continuous dependence on the data

struct DependenceTerms {
  double phi_dual_max = 0.0;  // max_t ||dphi||_{(H^1)'}^2
  double phi_l2 = 0.0;        // int ||dphi||^2
  double mu_dual = 0.0;       // int ||dmu||_{(H^1)'}^2
  double u_rate_h1 = 0.0;     // int ||d(u_t)||_{H^1}^2
  double u_h1_max = 0.0;      // max_t ||du||_{H^1}^2
  double theta_l2 = 0.0;      // int ||dtheta||^2
  double p_l2_max = 0.0;      // max_t ||dp||^2
  double p_h1 = 0.0;          // int ||dp||_{H^1}^2
  double total() const;
};

struct DependenceRow {
  double scale = 0.0;
  DependenceTerms lhs;
  double rhs = 0.0;  // ||dphi0||_{(H^1)'}^2 + ||du0||_{H^1}^2 + ||dtheta0||^2
  double lhs_norm() const;
  double ratio() const;
};

/// Runs `data` and `data + s * phi_perturbation` for every scale and compares
/// the trajectories. Requires the constant-coefficient regime.
std::vector<DependenceRow> continuous_dependence_experiment(const Mesh& mesh,
                                                            const MaterialTable& material,
                                                            const TimeStepConfig& cfg,
                                                            const State& data,
                                                            const Vector& phi_perturbation,
                                                            const std::vector<double>& scales);

/// Smooth fixed perturbation sin(pi x1) sin(pi x2).
Vector default_perturbation(const Mesh& mesh);

}  // namespace chb
