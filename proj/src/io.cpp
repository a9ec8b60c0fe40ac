#include "chb/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace chb {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(n >= 1, "n must be at least 1");
  require(output_every >= 1, "output_every must be at least 1");
  require(vtk_every >= 0, "vtk_every must be nonnegative");
  require(monitor_threshold > 0.0, "monitor_threshold must be positive");
  try {
    TimeStepConfig tc = time_step_config();
    tc.validate();
    if (t_final > 0.0) {
      const double steps = std::round(t_final / dt);
      require(std::abs(steps * dt - t_final) <= 1e-9 * t_final,
              "t_final must be an integer multiple of dt");
    }
    material.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

TimeStepConfig RunConfig::time_step_config() const {
  TimeStepConfig tc;
  tc.dt = dt;
  tc.t_final = t_final;
  tc.model = model;
  tc.constant_coefficients = constant_coefficients;
  tc.decoupling_tol = decoupling_tol;
  tc.decoupling_max_iters = decoupling_max_iters;
  tc.newton_tol = newton_tol;
  tc.newton_max_iters = newton_max_iters;
  return tc;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError("expected a real number, got '" + v + "'");
  }
  return x;
}

int parse_int(const std::string& v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

Key real_key(const char* name, double RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return format_real(c.*field); },
          [field](RunConfig& c, const std::string& v) { c.*field = parse_real(v); }};
}

Key int_key(const char* name, int RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return std::to_string(c.*field); },
          [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v); }};
}

Key bool_key(const char* name, bool RunConfig::*field) {
  return {name, [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); }};
}

Key material_key(const char* name, double MaterialTable::*field) {
  return {name, [field](const RunConfig& c) { return format_real(c.material.*field); },
          [field](RunConfig& c, const std::string& v) { c.material.*field = parse_real(v); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      int_key("n", &RunConfig::n),
      real_key("dt", &RunConfig::dt),
      real_key("t_final", &RunConfig::t_final),
      {"model", [](const RunConfig& c) { return std::string(to_string(c.model)); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.model = parse_model(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      bool_key("constant_coefficients", &RunConfig::constant_coefficients),
      real_key("decoupling_tol", &RunConfig::decoupling_tol),
      int_key("decoupling_max_iters", &RunConfig::decoupling_max_iters),
      real_key("newton_tol", &RunConfig::newton_tol),
      int_key("newton_max_iters", &RunConfig::newton_max_iters),
      material_key("kappa0", &MaterialTable::kappa0),
      material_key("kappa1", &MaterialTable::kappa1),
      material_key("M0", &MaterialTable::M0),
      material_key("M1", &MaterialTable::M1),
      material_key("alpha0", &MaterialTable::alpha0),
      material_key("alpha1", &MaterialTable::alpha1),
      material_key("E0", &MaterialTable::E0),
      material_key("E1", &MaterialTable::E1),
      material_key("nu0", &MaterialTable::nu0),
      material_key("nu1", &MaterialTable::nu1),
      material_key("gamma", &MaterialTable::gamma),
      material_key("proliferation", &MaterialTable::proliferation),
      material_key("eigenstrain_coeff", &MaterialTable::eigenstrain_coeff),
      material_key("Cv_scale", &MaterialTable::Cv_scale),
      material_key("mobility_floor", &MaterialTable::mobility_floor),
      material_key("source_theta", &MaterialTable::source_theta),
      {"outdir", [](const RunConfig& c) { return c.outdir.string(); },
       [](RunConfig& c, const std::string& v) {
         if (v.empty()) throw ConfigError("outdir must not be empty");
         c.outdir = v;
       }},
      int_key("output_every", &RunConfig::output_every),
      int_key("vtk_every", &RunConfig::vtk_every),
      bool_key("write_vtk", &RunConfig::write_vtk),
      bool_key("write_contours", &RunConfig::write_contours),
      bool_key("energy_monitor", &RunConfig::energy_monitor),
      real_key("monitor_threshold", &RunConfig::monitor_threshold),
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + "expected 'key = value'");
    const auto& table = keys();
    const auto it =
        std::find_if(table.begin(), table.end(), [&](const Key& k) { return key == k.name; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Initial data

State build_initial_data(const Mesh& mesh) {
  State s = State::zeros(mesh);
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    const double x1 = mesh.nodes[k].x(), x2 = mesh.nodes[k].y();
    const double h = (std::sin(14.4 * x1 + 11.2 * x2 - 12.8) + 1.0) * std::pow(8.0 * x1 - 4.2, 2) +
                     (std::sin(16.0 * x1 - 8.0) + 1.0) * std::pow(16.0 * x2 - 8.0, 2);
    s.phi[k] = h < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - h)) : 0.0;
  }
  s.theta.setConstant(0.5);
  return s;
}

// ---------------------------------------------------------------------------
// Writers

namespace {

std::ofstream open_for_writing(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

std::string format_timeseries_csv(const std::vector<TimeSeriesRow>& rows) {
  std::string out = "time,mass,E_phi,E_u,E_theta,E_total,grad_mu_sq,grad_p_sq,outer_iters\n";
  for (const auto& r : rows) {
    for (double x : {r.time, r.tumor_mass, r.E_phi, r.E_u, r.E_theta, r.E_total,
                     r.grad_mu_norm_sq, r.grad_p_norm_sq}) {
      out += format_real(x);
      out += ',';
    }
    out += std::to_string(r.outer_iterations);
    out += '\n';
  }
  return out;
}

void write_timeseries_csv(const fs::path& path, const std::vector<TimeSeriesRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_timeseries_csv: no rows");
  auto out = open_for_writing(path);
  out << format_timeseries_csv(rows);
  finish(out, path);
}

void write_vtk(const fs::path& path, const Mesh& mesh, const MaterialTable& t, const State& s) {
  const int nn = mesh.num_nodes();
  if (s.phi.size() != nn || s.mu.size() != nn || s.theta.size() != nn || s.p.size() != nn ||
      s.u.size() != 2 * nn) {
    throw std::invalid_argument("write_vtk: state does not match the mesh");
  }
  auto out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\n"
      << "state at t = " << format_real(s.time) << "\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_GRID\n"
      << "DIMENSIONS " << mesh.n + 1 << ' ' << mesh.n + 1 << " 1\n"
      << "POINTS " << nn << " double\n";
  for (const auto& x : mesh.nodes) out << format_real(x.x()) << ' ' << format_real(x.y()) << " 0\n";
  out << "POINT_DATA " << nn << "\n";
  const std::pair<const char*, const Vector*> scalars[] = {
      {"phi", &s.phi}, {"mu", &s.mu}, {"theta", &s.theta}, {"p", &s.p}};
  for (const auto& [name, f] : scalars) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < nn; ++k) out << format_real((*f)[k]) << '\n';
  }
  out << "VECTORS u double\n";
  for (int k = 0; k < nn; ++k)
    out << format_real(s.u[2 * k]) << ' ' << format_real(s.u[2 * k + 1]) << " 0\n";
  const auto q = darcy_velocity(mesh, t, s.phi, s.p);
  out << "CELL_DATA " << mesh.num_elements() << "\n"
      << "VECTORS darcy_velocity double\n";
  for (const auto& v : q) out << format_real(v.x()) << ' ' << format_real(v.y()) << " 0\n";
  finish(out, path);
}

void write_contours(const fs::path& path, const std::vector<ContourSet>& sets) {
  auto out = open_for_writing(path);
  for (const auto& c : sets) {
    out << "# level " << format_real(c.level) << "\n";
    for (const auto& line : c.polylines) {
      for (const auto& x : line) out << format_real(x.x()) << ' ' << format_real(x.y()) << '\n';
      out << '\n';
    }
  }
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

std::string step_name(const char* stem, int step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d.%s", stem, step, ext);
  return buf;
}

}  // namespace

RunSummary run_simulation(const RunConfig& cfg) {
  cfg.validate();
  const Mesh mesh = build_mesh({cfg.n});
  const Simulator sim(mesh, cfg.material, cfg.time_step_config());
  const MaterialTable& material = sim.material();
  const State initial = build_initial_data(mesh);
  const int steps = sim.num_steps();
  fs::create_directories(cfg.outdir);

  RunSummary summary;
  std::vector<InequalitySample> samples;
  State previous;
  bool nested_everywhere = true;
  sim.run(initial, [&](int k, const State& s, const DecouplingReport& report) {
    if (k % cfg.output_every == 0 || k == steps) {
      summary.rows.push_back(make_row(mesh, material, cfg.model, s, report.outer_iterations));
    }
    if (cfg.energy_monitor) {
      samples.push_back(inequality_sample(mesh, s, k > 0 ? &previous : nullptr));
      previous = s;
    }
    const bool snapshot = k == steps || (cfg.vtk_every > 0 ? k % cfg.vtk_every == 0 : k == 0);
    if (snapshot && cfg.write_vtk) {
      const fs::path path = cfg.outdir / step_name("state", k, "vtk");
      write_vtk(path, mesh, material, s);
      summary.files.push_back(path);
    }
    if (snapshot && cfg.write_contours) {
      const ContourSet outer = marching_squares(mesh, s.phi, 0.5);
      const ContourSet inner = marching_squares(mesh, s.phi, 0.9);
      nested_everywhere = nested_everywhere && nested(mesh, inner, outer);
      const fs::path path = cfg.outdir / step_name("contours", k, "txt");
      write_contours(path, {outer, inner});
      summary.files.push_back(path);
    }
    if (k == steps) summary.final_state = s;
  });
  const fs::path csv = cfg.outdir / "timeseries.csv";
  write_timeseries_csv(csv, summary.rows);
  summary.files.push_back(csv);
  if (cfg.energy_monitor) {
    summary.inequality = energy_inequality_monitor(samples, mesh, initial, cfg.monitor_threshold);
  }
  if (cfg.write_contours) summary.contours_nested = nested_everywhere;
  return summary;
}

std::vector<RunSummary> compare_models(const RunConfig& cfg) {
  std::vector<RunSummary> runs;
  for (Model m : {Model::ch, Model::cl, Model::chb}) {
    RunConfig c = cfg;
    c.model = m;
    c.outdir = cfg.outdir / std::string(to_string(m));
    runs.push_back(run_simulation(c));
  }
  std::string text = "time,mass_ch,mass_cl,mass_chb\n";
  for (std::size_t k = 0; k < runs[0].rows.size(); ++k) {
    text += format_real(runs[0].rows[k].time);
    for (const auto& r : runs) text += "," + format_real(r.rows.at(k).tumor_mass);
    text += "\n";
  }
  const fs::path path = cfg.outdir / "mass_comparison.csv";
  auto out = open_for_writing(path);
  out << text;
  finish(out, path);
  return runs;
}

DependenceSummary run_continuous_dependence(const RunConfig& cfg,
                                            const std::vector<double>& scales) {
  cfg.validate();
  if (!cfg.constant_coefficients) {
    throw ConfigError("continuous dependence requires constant_coefficients = true");
  }
  const Mesh mesh = build_mesh({cfg.n});
  DependenceSummary summary;
  summary.rows = continuous_dependence_experiment(mesh, cfg.material, cfg.time_step_config(),
                                                  build_initial_data(mesh),
                                                  default_perturbation(mesh), scales);
  std::string text =
      "scale,lhs,rhs,ratio,lhs_norm,phi_dual_max,phi_l2,mu_dual,u_rate_h1,u_h1_max,theta_l2,"
      "p_l2_max,p_h1\n";
  for (const auto& r : summary.rows) {
    const auto& d = r.lhs;
    for (double x : {r.scale, d.total(), r.rhs, r.ratio(), r.lhs_norm(), d.phi_dual_max,
                     d.phi_l2, d.mu_dual, d.u_rate_h1, d.u_h1_max, d.theta_l2, d.p_l2_max}) {
      text += format_real(x) + ",";
    }
    text += format_real(d.p_h1) + "\n";
  }
  summary.file = cfg.outdir / "continuous_dependence.csv";
  auto out = open_for_writing(summary.file);
  out << text;
  finish(out, summary.file);
  return summary;
}

}  // namespace chb
