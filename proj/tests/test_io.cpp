#include "chb/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace chb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("chb_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHB_SIM_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Minimal legacy VTK reader: returns the values that follow `SCALARS name`.
std::vector<double> read_vtk_scalars(const fs::path& p, const std::string& name, int count) {
  std::ifstream in(p);
  std::string token;
  while (in >> token) {
    if (token != "SCALARS") continue;
    std::string field, type, ncomp;
    in >> field >> type >> ncomp;
    if (field != name) continue;
    std::string lookup, table;
    in >> lookup >> table;
    std::vector<double> v(count);
    for (double& x : v) in >> x;
    return v;
  }
  return {};
}

}  // namespace

TEST(ParseConfig, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.n, 256);
  EXPECT_EQ(c.dt, 1.0 / 128);
  EXPECT_EQ(c.t_final, 1.5);
  EXPECT_EQ(c.model, Model::chb);
  EXPECT_EQ(c.material.gamma, 1e-4);
  EXPECT_EQ(c.material.proliferation, 5.0);
  EXPECT_FALSE(c.constant_coefficients);
}

TEST(ParseConfig, SelectsModelAndIgnoresComments) {
  const RunConfig c = parse_config("# comment\nmodel = cl\n\n  n=32   # trailing\nkappa1 = 4\n");
  EXPECT_EQ(c.model, Model::cl);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.material.kappa1, 4.0);
}

TEST(ParseConfig, Errors) {
  EXPECT_THROW(parse_config("n = 0"), ConfigError);
  EXPECT_THROW(parse_config("resolution = 3"), ConfigError);
  EXPECT_THROW(parse_config("n 32"), ConfigError);
  EXPECT_THROW(parse_config("n = 3.5"), ConfigError);
  EXPECT_THROW(parse_config("dt = abc"), ConfigError);
  EXPECT_THROW(parse_config("model = biot"), ConfigError);
  EXPECT_THROW(parse_config("nu0 = 0.5"), ConfigError);
  EXPECT_THROW(parse_config("dt = 0.3\nt_final = 1"), ConfigError);
  EXPECT_THROW(parse_config("write_vtk = maybe"), ConfigError);
  try {
    parse_config("n = 4\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(DumpConfig, GoldenDefaults) {
  const std::string expected =
      "n = 256\n"
      "dt = 0.0078125\n"
      "t_final = 1.5\n"
      "model = chb\n"
      "constant_coefficients = false\n"
      "decoupling_tol = 9.9999999999999995e-07\n"
      "decoupling_max_iters = 50\n"
      "newton_tol = 1.0000000000000001e-09\n"
      "newton_max_iters = 25\n"
      "kappa0 = 0.5\n"
      "kappa1 = 5\n"
      "M0 = 0.5\n"
      "M1 = 1\n"
      "alpha0 = 0.5\n"
      "alpha1 = 1\n"
      "E0 = 2.7999999999999998\n"
      "E1 = 1.3999999999999999\n"
      "nu0 = 0.40000000000000002\n"
      "nu1 = 0.20000000000000001\n"
      "gamma = 0.0001\n"
      "proliferation = 5\n"
      "eigenstrain_coeff = 0.29999999999999999\n"
      "Cv_scale = 9.9999999999999998e-17\n"
      "mobility_floor = 9.9999999999999998e-17\n"
      "source_theta = 0\n"
      "outdir = out\n"
      "output_every = 1\n"
      "vtk_every = 0\n"
      "write_vtk = true\n"
      "write_contours = true\n"
      "energy_monitor = true\n"
      "monitor_threshold = 10000\n";
  EXPECT_EQ(dump_config(RunConfig{}), expected);
}

TEST(DumpConfig, RoundTrips) {
  RunConfig c;
  c.n = 17;
  c.dt = 0.1;
  c.t_final = 0.3;
  c.model = Model::ch;
  c.material.E1 = 1.0 / 3.0;
  c.outdir = "results/a";
  const RunConfig back = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.material.E1, 1.0 / 3.0);
}

TEST(InitialData, Examples) {
  const Mesh m = build_mesh({2});
  const State s = build_initial_data(m);
  const int center = m.node_index(1, 1);
  EXPECT_NEAR(s.phi[center], std::exp(-1.0 / 24.0), 1e-12);
  EXPECT_NEAR(s.phi[center], 0.959189, 1e-6);
  EXPECT_EQ(s.phi[m.node_index(0, 0)], 0.0);
  for (int k = 0; k < m.num_nodes(); ++k) EXPECT_EQ(s.theta[k], 0.5);
  EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.mu.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InitialData, BoundedBump) {
  const Mesh m = build_mesh({64});
  const State s = build_initial_data(m);
  EXPECT_GE(s.phi.minCoeff(), 0.0);
  EXPECT_LE(s.phi.maxCoeff(), 1.0);
  EXPECT_GT(s.phi.maxCoeff(), 0.9);
  EXPECT_EQ(s.phi[0], 0.0);
}

TEST(TimeSeries, HeaderAndRows) {
  TimeSeriesRow r;
  r.time = 0.0;
  r.tumor_mass = 0.1;
  r.E_total = 1.0 / 3.0;
  r.outer_iterations = 2;
  const std::string text = format_timeseries_csv({r});
  EXPECT_EQ(text,
            "time,mass,E_phi,E_u,E_theta,E_total,grad_mu_sq,grad_p_sq,outer_iters\n"
            "0,0.10000000000000001,0,0,0,0.33333333333333331,0,0,2\n");
  const fs::path dir = scratch("csv");
  write_timeseries_csv(dir / "a.csv", {r});
  write_timeseries_csv(dir / "b.csv", {r});
  EXPECT_EQ(slurp(dir / "a.csv"), text);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_THROW(write_timeseries_csv(dir / "c.csv", {}), std::invalid_argument);
}

TEST(Vtk, SingleCellLayout) {
  const Mesh m = build_mesh({1});
  const fs::path p = scratch("vtk1") / "s.vtk";
  write_vtk(p, m, MaterialTable{}, State::zeros(m));
  const std::string text = slurp(p);
  EXPECT_NE(text.find("DATASET STRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(text.find("DIMENSIONS 2 2 1"), std::string::npos);
  EXPECT_NE(text.find("POINTS 4 double"), std::string::npos);
  EXPECT_NE(text.find("CELL_DATA 1"), std::string::npos);
  int scalars = 0, vectors = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    scalars += line.rfind("SCALARS", 0) == 0;
    vectors += line.rfind("VECTORS", 0) == 0;
  }
  EXPECT_EQ(scalars, 4);
  EXPECT_EQ(vectors, 2);
}

TEST(Vtk, PhaseRoundTrip) {
  const Mesh m = build_mesh({16});
  State s = build_initial_data(m);
  s.p = s.phi * 0.3;
  const fs::path p = scratch("vtk2") / "s.vtk";
  write_vtk(p, m, MaterialTable{}, s);
  const auto phi = read_vtk_scalars(p, "phi", m.num_nodes());
  ASSERT_EQ(phi.size(), static_cast<std::size_t>(m.num_nodes()));
  for (int k = 0; k < m.num_nodes(); ++k) EXPECT_NEAR(phi[k], s.phi[k], 1e-12);
  const auto pressure = read_vtk_scalars(p, "p", m.num_nodes());
  for (int k = 0; k < m.num_nodes(); ++k) EXPECT_EQ(pressure[k], s.p[k]);
}

TEST(Vtk, RejectsMismatchedState) {
  const fs::path p = scratch("vtk3") / "s.vtk";
  EXPECT_THROW(write_vtk(p, build_mesh({2}), MaterialTable{}, State::zeros(build_mesh({1}))),
               std::invalid_argument);
}

TEST(Contours, FileFormat) {
  ContourSet c;
  c.level = 0.5;
  c.polylines.push_back({Eigen::Vector2d(0, 0.5), Eigen::Vector2d(1, 0.5)});
  const fs::path p = scratch("contour") / "c.txt";
  write_contours(p, {c, ContourSet{0.9, {}, {}}});
  EXPECT_EQ(slurp(p), "# level 0.5\n0 0.5\n1 0.5\n\n# level 0.90000000000000002\n");
}

TEST(RunSimulation, ShortRunWritesOutputs) {
  RunConfig c;
  c.n = 8;
  c.dt = 1.0 / 64;
  c.t_final = 4.0 / 64;
  c.model = Model::chb;
  c.outdir = scratch("run");
  const RunSummary s = run_simulation(c);
  ASSERT_EQ(s.rows.size(), 5u);
  EXPECT_DOUBLE_EQ(s.rows.back().time, 4.0 / 64);
  EXPECT_TRUE(fs::exists(c.outdir / "timeseries.csv"));
  EXPECT_TRUE(fs::exists(c.outdir / "state_00000.vtk"));
  EXPECT_TRUE(fs::exists(c.outdir / "state_00004.vtk"));
  EXPECT_TRUE(fs::exists(c.outdir / "contours_00004.txt"));
  ASSERT_TRUE(s.inequality.has_value());
  EXPECT_TRUE(s.inequality->bounded);
  ASSERT_TRUE(s.contours_nested.has_value());
  EXPECT_EQ(s.rows.size(), s.inequality->lhs.size());

  const std::string first = slurp(c.outdir / "timeseries.csv");
  run_simulation(c);
  EXPECT_EQ(slurp(c.outdir / "timeseries.csv"), first);
}

TEST(RunSimulation, CahnHilliardMassIsNondecreasing) {
  RunConfig c;
  c.n = 8;
  c.dt = 1.0 / 32;
  c.t_final = 0.25;
  c.model = Model::ch;
  c.write_vtk = false;
  c.write_contours = false;
  c.outdir = scratch("chmass");
  const RunSummary s = run_simulation(c);
  for (std::size_t k = 1; k < s.rows.size(); ++k) {
    EXPECT_GE(s.rows[k].tumor_mass, s.rows[k - 1].tumor_mass);
  }
}

TEST(RunContinuousDependence, RequiresConstantCoefficients) {
  RunConfig c;
  c.n = 4;
  c.dt = 0.05;
  c.t_final = 0.1;
  c.outdir = scratch("cd");
  EXPECT_THROW(run_continuous_dependence(c), ConfigError);
}

TEST(Cli, ShortRun) {
  const fs::path dir = scratch("cli_run");
  EXPECT_EQ(run_cli("--model ch --n 8 --dt 0.03125 --tfinal 0.0625 --outdir " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "timeseries.csv"));
  EXPECT_TRUE(fs::exists(dir / "state_00002.vtk"));
}

TEST(Cli, CompareModels) {
  const fs::path dir = scratch("cli_cmp");
  EXPECT_EQ(run_cli("--compare-models --n 4 --dt 0.0625 --tfinal 0.125 --outdir " + dir.string()),
            0);
  const std::string csv = slurp(dir / "mass_comparison.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time,mass_ch,mass_cl,mass_chb");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, ConfigFileAndOverrides) {
  const fs::path dir = scratch("cli_cfg");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n = 4\nmodel = ch\ndt = 0.0625\nt_final = 0.0625\nwrite_vtk = false\n";
  }
  EXPECT_EQ(run_cli("--config " + (dir / "run.cfg").string() + " --outdir " + (dir / "o").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "o" / "timeseries.csv"));
  EXPECT_FALSE(fs::exists(dir / "o" / "state_00000.vtk"));
}

TEST(Cli, Failures) {
  const fs::path dir = scratch("cli_bad");
  EXPECT_NE(run_cli("--continuous-dependence --n 4 --dt 0.05 --tfinal 0.1 --outdir " + dir.string()), 0);
  EXPECT_NE(run_cli("--model heat --outdir " + dir.string()), 0);
  EXPECT_NE(run_cli("--compare-models --model ch --outdir " + dir.string()), 0);
  EXPECT_NE(run_cli("--n 0 --outdir " + dir.string()), 0);
  EXPECT_NE(run_cli("--config /nonexistent/file.cfg"), 0);
  EXPECT_NE(run_cli("--dt 0.3 --tfinal 1 --outdir " + dir.string()), 0);
}
