#include "chb/diagnostics.hpp"

#include "chb/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace chb {

double tumor_mass(const Mesh& mesh, const Vector& phi) {
  return q1::integrate(mesh, q1::at_quadrature(mesh, phi));
}

TimeSeriesRow make_row(const Mesh& mesh, const MaterialTable& t, Model model, const State& s,
                       int outer_iterations) {
  const EnergyReport e = energy_report(mesh, t, s, model);
  TimeSeriesRow row;
  row.time = s.time;
  row.tumor_mass = tumor_mass(mesh, s.phi);
  row.E_phi = e.E_phi;
  row.E_u = e.E_u;
  row.E_theta = e.E_theta;
  row.E_total = e.total;
  row.grad_mu_norm_sq = e.grad_mu_norm_sq;
  row.grad_p_norm_sq = e.grad_p_norm_sq;
  row.outer_iterations = outer_iterations;
  return row;
}

// ---------------------------------------------------------------------------

double l2_norm_sq(const Mesh& mesh, const Vector& f) {
  return q1::integrate(mesh, q1::at_quadrature(mesh, f).cwiseAbs2());
}

double h1_seminorm_sq(const Mesh& mesh, const Vector& f) {
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = q1::gather(mesh, e, f);
    for (int q = 0; q < q1::kPoints; ++q) sum += q1::gradient(mesh, q, fe).squaredNorm();
  }
  return q1::weight(mesh) * sum;
}

double h1_norm_sq(const Mesh& mesh, const Vector& f) {
  return l2_norm_sq(mesh, f) + h1_seminorm_sq(mesh, f);
}

namespace {

Vector component(const Vector& u, int c) {
  Vector out(u.size() / 2);
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = u[2 * k + c];
  return out;
}

}  // namespace

double vector_l2_norm_sq(const Mesh& mesh, const Vector& u) {
  return l2_norm_sq(mesh, component(u, 0)) + l2_norm_sq(mesh, component(u, 1));
}

double vector_h1_norm_sq(const Mesh& mesh, const Vector& u) {
  return h1_norm_sq(mesh, component(u, 0)) + h1_norm_sq(mesh, component(u, 1));
}

double dual_norm_sq(const Mesh& mesh, const Vector& f) {
  const double mean = tumor_mass(mesh, f);
  const Vector centered = f - Vector::Constant(f.size(), mean);
  const SparseMatrix M = assemble_scalar_mass(mesh);
  const Vector rhs = M * centered;
  const double scale = (M * f).norm();
  double gradient_part = 0.0;
  // a constant field leaves only rounding noise after centering
  if (rhs.norm() > 1e-14 * scale) {
    SolverConfig cfg;
    cfg.relative_tolerance = 1e-12;
    cfg.absolute_tolerance = 1e-16 * scale;
    const Vector w = solve_spd(assemble_weighted_stiffness(mesh, 1.0), rhs, cfg).x;
    gradient_part = w.dot(rhs);
  }
  return gradient_part + mean * mean;
}

// ---------------------------------------------------------------------------

InequalitySample inequality_sample(const Mesh& mesh, const State& s, const State* previous) {
  InequalitySample out;
  out.time = s.time;
  out.phi_h1_sq = h1_norm_sq(mesh, s.phi);
  out.mu_h1_sq = h1_norm_sq(mesh, s.mu);
  out.p_h1_sq = h1_norm_sq(mesh, s.p);
  out.p_l2_sq = l2_norm_sq(mesh, s.p);
  out.psi_l1 = q1::integrate(
      mesh, q1::at_quadrature(mesh, s.phi).unaryExpr([](double x) { return std::abs(double_well(x)); }));
  out.u_h1_sq = vector_h1_norm_sq(mesh, s.u);
  if (previous) {
    out.dt = s.time - previous->time;
    if (out.dt > 0.0) out.u_rate_h1_sq = vector_h1_norm_sq(mesh, (s.u - previous->u) / out.dt);
  }
  return out;
}

InequalityReport energy_inequality_monitor(const std::vector<InequalitySample>& samples,
                                           const Mesh& mesh, const State& initial,
                                           double threshold) {
  InequalityReport r;
  r.threshold = threshold;
  r.data_functional = 1.0 + h1_norm_sq(mesh, initial.phi) + vector_l2_norm_sq(mesh, initial.u) +
                      l2_norm_sq(mesh, initial.theta);
  double integrated = 0.0;
  bool finite = std::isfinite(r.data_functional);
  for (const auto& s : samples) {
    integrated += s.dt * (s.mu_h1_sq + s.p_h1_sq + s.u_h1_sq + s.u_rate_h1_sq);
    const double lhs = s.phi_h1_sq + s.p_l2_sq + s.psi_l1 + integrated;
    if (!std::isfinite(lhs)) finite = false;
    r.lhs.push_back(lhs);
    r.max_lhs = std::max(r.max_lhs, lhs);
  }
  if (!finite) {
    r.max_lhs = std::numeric_limits<double>::infinity();
  }
  r.ratio = r.max_lhs / r.data_functional;
  r.bounded = finite && r.ratio <= threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Marching squares

namespace {

// Edge keys: 2*node for the edge to the right neighbour, 2*node+1 for the
// edge to the upper neighbour.
struct EdgeGrid {
  const Mesh& mesh;
  const Vector& f;
  double level;

  bool inside(int node) const { return f[node] > level; }

  Eigen::Vector2d point(long key) const {
    const int a = static_cast<int>(key / 2);
    const int i = a % (mesh.n + 1);
    const int j = a / (mesh.n + 1);
    const int b = key % 2 == 0 ? mesh.node_index(i + 1, j) : mesh.node_index(i, j + 1);
    const double t = (level - f[a]) / (f[b] - f[a]);
    return mesh.nodes[a] + t * (mesh.nodes[b] - mesh.nodes[a]);
  }
};

}  // namespace

ContourSet marching_squares(const Mesh& mesh, const Vector& field, double level) {
  ContourSet out;
  out.level = level;
  if (!std::isfinite(level)) return out;
  const EdgeGrid grid{mesh, field, level};
  const int n = mesh.n;

  std::vector<std::array<long, 2>> segments;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::array<int, 4> c = {mesh.node_index(i, j), mesh.node_index(i + 1, j),
                                    mesh.node_index(i + 1, j + 1), mesh.node_index(i, j + 1)};
      // bottom, right, top, left
      const std::array<long, 4> edge = {2L * c[0], 2L * c[1] + 1, 2L * c[3], 2L * c[0] + 1};
      const std::array<std::array<int, 2>, 4> ends = {{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};
      std::array<bool, 4> in{};
      for (int k = 0; k < 4; ++k) in[k] = grid.inside(c[k]);
      std::vector<int> cut;
      for (int k = 0; k < 4; ++k)
        if (in[ends[k][0]] != in[ends[k][1]]) cut.push_back(k);
      if (cut.size() == 2) {
        segments.push_back({edge[cut[0]], edge[cut[1]]});
      } else if (cut.size() == 4) {
        const double avg = 0.25 * (field[c[0]] + field[c[1]] + field[c[2]] + field[c[3]]);
        const bool center = avg > level;
        // isolate the corners on the other side of the center
        const std::array<std::array<int, 2>, 4> around = {{{3, 0}, {0, 1}, {1, 2}, {2, 3}}};
        for (int k = 0; k < 4; ++k) {
          if (in[k] != center) segments.push_back({edge[around[k][0]], edge[around[k][1]]});
        }
      }
    }
  }

  const long num_keys = 2L * mesh.num_nodes();
  std::vector<std::array<int, 2>> incident(num_keys, {-1, -1});
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    for (long key : segments[s]) {
      auto& slot = incident[key];
      (slot[0] < 0 ? slot[0] : slot[1]) = s;
    }
  }
  std::vector<char> used(segments.size(), 0);
  auto degree = [&](long key) { return (incident[key][0] >= 0) + (incident[key][1] >= 0); };
  auto walk = [&](long start, int seg) {
    std::vector<Eigen::Vector2d> line{grid.point(start)};
    long key = start;
    while (seg >= 0 && !used[seg]) {
      used[seg] = 1;
      key = segments[seg][0] == key ? segments[seg][1] : segments[seg][0];
      line.push_back(grid.point(key));
      const auto& slot = incident[key];
      seg = slot[0] == seg ? slot[1] : slot[0];
    }
    out.polylines.push_back(std::move(line));
  };
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    for (long key : segments[s]) {
      if (!used[s] && degree(key) == 1) walk(key, s);
    }
  }
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    if (!used[s]) walk(segments[s][0], s);
  }

  // boundary edges as (edge key, first node, second node)
  std::vector<std::array<long, 3>> rim;
  for (int i = 0; i < n; ++i) {
    for (int j : {0, n}) rim.push_back({2L * mesh.node_index(i, j), mesh.node_index(i, j), mesh.node_index(i + 1, j)});
    for (int k : {0, n}) rim.push_back({2L * mesh.node_index(k, i) + 1, mesh.node_index(k, i), mesh.node_index(k, i + 1)});
  }
  for (const auto& [key, a, b] : rim) {
    const bool ia = grid.inside(static_cast<int>(a)), ib = grid.inside(static_cast<int>(b));
    if (!ia && !ib) continue;
    const Eigen::Vector2d pa = ia ? mesh.nodes[a] : grid.point(key);
    const Eigen::Vector2d pb = ib ? mesh.nodes[b] : grid.point(key);
    out.boundary.push_back({pa, pb});
  }
  return out;
}

double contour_length(const ContourSet& c) {
  double length = 0.0;
  for (const auto& line : c.polylines)
    for (std::size_t k = 1; k < line.size(); ++k) length += (line[k] - line[k - 1]).norm();
  return length;
}

bool is_closed(const std::vector<Eigen::Vector2d>& polyline) {
  return polyline.size() > 2 && polyline.front() == polyline.back();
}

bool contains(const ContourSet& c, const Eigen::Vector2d& x) {
  bool inside = false;
  const auto cross = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) inside = !inside;
    }
  };
  for (const auto& line : c.polylines)
    for (std::size_t k = 1; k < line.size(); ++k) cross(line[k - 1], line[k]);
  for (const auto& [a, b] : c.boundary) cross(a, b);
  return inside;
}

bool nested(const Mesh& mesh, const ContourSet& inner, const ContourSet& outer) {
  for (const auto& x : mesh.nodes) {
    if (contains(inner, x) && !contains(outer, x)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::vector<Eigen::Vector2d> darcy_velocity(const Mesh& mesh, const MaterialTable& t,
                                            const Vector& phi, const Vector& p) {
  std::vector<Eigen::Vector2d> q(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto f = q1::gather(mesh, e, phi);
    const auto pe = q1::gather(mesh, e, p);
    const double center = 0.25 * f.sum();
    const Eigen::Vector2d grad((pe[1] - pe[0] + pe[2] - pe[3]) / (2.0 * mesh.h),
                               (pe[3] - pe[0] + pe[2] - pe[1]) / (2.0 * mesh.h));
    q[e] = -permeability(t, center).value * grad;
  }
  return q;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit needs two or more paired samples");
  }
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sx += x[k], sy += y[k];
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------

double DependenceTerms::total() const {
  return phi_dual_max + phi_l2 + mu_dual + u_rate_h1 + u_h1_max + theta_l2 + p_l2_max + p_h1;
}

double DependenceRow::lhs_norm() const { return std::sqrt(lhs.total()); }

double DependenceRow::ratio() const { return rhs > 0.0 ? lhs.total() / rhs : 0.0; }

std::vector<DependenceRow> continuous_dependence_experiment(const Mesh& mesh,
                                                            const MaterialTable& material,
                                                            const TimeStepConfig& cfg,
                                                            const State& data,
                                                            const Vector& phi_perturbation,
                                                            const std::vector<double>& scales) {
  if (!cfg.constant_coefficients && !material.has_constant_coefficients()) {
    throw std::invalid_argument(
        "continuous dependence requires the constant-coefficient configuration");
  }
  if (phi_perturbation.size() != mesh.num_nodes()) {
    throw std::invalid_argument("perturbation has the wrong size");
  }
  std::vector<State> reference;
  Simulator(mesh, material, cfg).run(data, [&](int, const State& s, const DecouplingReport&) {
    reference.push_back(s);
  });

  std::vector<DependenceRow> rows;
  for (double scale : scales) {
    DependenceRow row;
    row.scale = scale;
    State perturbed = data;
    perturbed.phi += scale * phi_perturbation;
    row.rhs = dual_norm_sq(mesh, perturbed.phi - data.phi) +
              vector_h1_norm_sq(mesh, perturbed.u - data.u) +
              l2_norm_sq(mesh, perturbed.theta - data.theta);
    Vector du_prev;
    DependenceTerms& d = row.lhs;
    Simulator(mesh, material, cfg).run(perturbed, [&](int k, const State& s, const DecouplingReport&) {
      const State& r = reference.at(k);
      const Vector dphi = s.phi - r.phi;
      const Vector du = s.u - r.u;
      const Vector dp = s.p - r.p;
      d.phi_dual_max = std::max(d.phi_dual_max, dual_norm_sq(mesh, dphi));
      d.u_h1_max = std::max(d.u_h1_max, vector_h1_norm_sq(mesh, du));
      d.p_l2_max = std::max(d.p_l2_max, l2_norm_sq(mesh, dp));
      if (k > 0) {
        const double dt = cfg.dt;
        d.phi_l2 += dt * l2_norm_sq(mesh, dphi);
        d.mu_dual += dt * dual_norm_sq(mesh, s.mu - r.mu);
        d.u_rate_h1 += dt * vector_h1_norm_sq(mesh, (du - du_prev) / dt);
        d.theta_l2 += dt * l2_norm_sq(mesh, s.theta - r.theta);
        d.p_h1 += dt * h1_norm_sq(mesh, dp);
      }
      du_prev = du;
    });
    rows.push_back(row);
  }
  return rows;
}

Vector default_perturbation(const Mesh& mesh) {
  Vector v(mesh.num_nodes());
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    v[k] = std::sin(M_PI * mesh.nodes[k].x()) * std::sin(M_PI * mesh.nodes[k].y());
  }
  return v;
}

}  // namespace chb
