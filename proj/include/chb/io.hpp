#pragma once

#include "chb/diagnostics.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Defaults reproduce the reference simulation:
/// n = 256, dt = 2^-7, T = 1.5 and the default MaterialTable.
struct RunConfig {
  int n = 256;
  double dt = 1.0 / 128.0;
  double t_final = 1.5;
  Model model = Model::chb;
  MaterialTable material;
  bool constant_coefficients = false;
  double decoupling_tol = 1e-6;
  int decoupling_max_iters = 50;
  double newton_tol = 1e-9;
  int newton_max_iters = 25;

  std::filesystem::path outdir = "out";
  int output_every = 1;  // CSV row cadence in steps
  int vtk_every = 0;     // 0 writes the initial and final states only
  bool write_vtk = true;
  bool write_contours = true;
  bool energy_monitor = true;
  double monitor_threshold = 1e4;

  /// Throws ConfigError on an out-of-range value.
  void validate() const;
  TimeStepConfig time_step_config() const;
};

/// `key = value` lines; `#` starts a comment. Omitted keys keep their
/// defaults. Throws ConfigError on malformed lines, unknown keys and
/// out-of-range values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key in a fixed order, reals with 17 significant digits. The output
/// parses back to the same configuration.
std::string dump_config(const RunConfig& cfg);

/// phi0 = exp(1 - 1/(1 - h(x))) where h(x) < 1 and 0 elsewhere, with
/// h(x) = (sin(14.4 x1 + 11.2 x2 - 12.8) + 1)(8 x1 - 4.2)^2
///      + (sin(16 x1 - 8) + 1)(16 x2 - 8)^2;
/// theta0 = 1/2; mu0, u0, p0 = 0.
State build_initial_data(const Mesh& mesh);

/// Decimal text with 17 significant digits.
std::string format_real(double x);

std::string format_timeseries_csv(const std::vector<TimeSeriesRow>& rows);
void write_timeseries_csv(const std::filesystem::path& path,
                          const std::vector<TimeSeriesRow>& rows);

/// Legacy ASCII VTK structured grid: point scalars phi, mu, theta, p, point
/// vectors u and the cell vectors darcy_velocity.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const MaterialTable& t,
               const State& s);

/// One `# level L` header per set, then one `x y` line per point and a blank
/// line after each polyline.
void write_contours(const std::filesystem::path& path, const std::vector<ContourSet>& sets);

struct RunSummary {
  std::vector<TimeSeriesRow> rows;
  State final_state;
  std::optional<InequalityReport> inequality;
  /// Contour nesting (0.9 inside 0.5) held at every output time; unset when
  /// contours were not requested.
  std::optional<bool> contours_nested;
  std::vector<std::filesystem::path> files;
};

/// Runs one model from the reference initial data and writes
/// timeseries.csv, state_<step>.vtk and contours_<step>.txt under outdir.
RunSummary run_simulation(const RunConfig& cfg);

/// Runs CH, CL and CHB and writes mass_comparison.csv with columns
/// time,mass_ch,mass_cl,mass_chb. Each model also gets its own
/// subdirectory with the single-run outputs.
std::vector<RunSummary> compare_models(const RunConfig& cfg);

struct DependenceSummary {
  std::vector<DependenceRow> rows;
  std::filesystem::path file;
};

/// Runs the continuous-dependence harness for the scales 1e-1, 1e-2, 1e-3
/// and writes continuous_dependence.csv. Requires constant_coefficients.
DependenceSummary run_continuous_dependence(const RunConfig& cfg,
                                            const std::vector<double>& scales = {1e-1, 1e-2,
                                                                                 1e-3});

}  // namespace chb
