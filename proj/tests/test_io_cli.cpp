#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "odefilter/cli.hpp"
#include "odefilter/errors.hpp"
#include "odefilter/io.hpp"

using namespace odefilter;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "odefilter_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

cli::ExperimentConfig config(const std::string& problem, const std::string& prior,
                             const fs::path& out) {
  cli::ExperimentConfig c;
  c.problem = problem;
  c.prior = prior;
  c.out = out;
  return c;
}

}  // namespace

// =============================================================================
// CSV
// =============================================================================

TEST(Csv, FormatRoundTripsArbitraryDoubles) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int k = 0; k < 20000; ++k) {
    double v;
    const std::uint64_t b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v) << io::format_double(v);
  }
}

TEST(Csv, TrajectoryRoundTrip) {
  const auto traj = solve_ivp(make_problem("orbit"), StateSpacePrior::ioup(2, -1.5), 0.1);
  std::stringstream ss;
  io::write_trajectory_csv(ss, traj);
  const auto back = io::read_trajectory_csv(ss);
  EXPECT_EQ(back.q, 2);
  EXPECT_EQ(back.d, 4);
  ASSERT_EQ(back.states.size(), traj.states.size());
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    EXPECT_EQ(back.states[n].t, traj.states[n].t);
    EXPECT_EQ(back.states[n].mean, traj.states[n].mean);
    EXPECT_EQ(back.states[n].cov.diagonal(), traj.states[n].cov.diagonal());
  }
}

TEST(Csv, TrajectoryHeader) {
  const auto traj = solve_ivp(make_problem("van_der_pol", {{"T", 1.0}}), StateSpacePrior::iwp(1), 0.5);
  std::stringstream ss;
  io::write_trajectory_csv(ss, traj);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "t,mean_0_0,mean_0_1,mean_1_0,mean_1_1,var_0,var_1");
}

TEST(Csv, ReadsBackSubnormals) {
  std::stringstream ss("t,a\n" + io::format_double(4.9406564584124654e-324) + ",1e-310\n");
  const auto table = io::read_csv(ss);
  EXPECT_EQ(table.rows[0][0], 4.9406564584124654e-324);
  EXPECT_EQ(table.rows[0][1], 1e-310);
}

TEST(Csv, RejectsGarbageCells) {
  std::stringstream ss("t,a\n1,2x\n");
  EXPECT_THROW((void)io::read_csv(ss), std::invalid_argument);
}

TEST(Csv, RejectsRaggedRows) {
  std::stringstream ss("t,a\n1,2\n3\n");
  EXPECT_THROW((void)io::read_csv(ss), std::invalid_argument);
}

// =============================================================================
// solve
// =============================================================================

TEST(RunSolve, WritesTrajectoryAndReport) {
  const auto dir = scratch("solve_neg_exp");
  const auto out = cli::run_solve(config("neg_exp", "ioup", dir));
  ASSERT_TRUE(fs::exists(dir / "trajectory.csv"));
  const auto rep = read_json(dir / "report.json");
  EXPECT_EQ(rep["config"]["problem"], "neg_exp");
  EXPECT_EQ(rep["config"]["q"], 2);
  EXPECT_EQ(rep["config"]["theta"], -1.5);
  EXPECT_EQ(rep["config"]["h"], 0.5);
  EXPECT_EQ(rep["config"]["T"], 10.0);
  EXPECT_EQ(rep["config"]["R"], 0.0);
  EXPECT_EQ(rep["provenance"].size(), 0u);
  EXPECT_EQ(rep["errors"]["max_abs"][0].get<double>(), out.errors.max_abs[0]);
  EXPECT_TRUE(rep.contains("wall_time_s"));

  std::ifstream csv(dir / "trajectory.csv");
  const auto back = io::read_trajectory_csv(csv);
  ASSERT_EQ(back.states.size(), out.trajectory.states.size());
  EXPECT_EQ(back.states.back().mean, out.trajectory.states.back().mean);
}

TEST(RunSolve, ReportReproducesRun) {
  const auto dir = scratch("solve_repro");
  auto c = config("van_der_pol", "ioup", dir / "first");
  c.T = 5.0;
  (void)cli::run_solve(c);
  const auto rep = read_json(dir / "first" / "report.json");
  EXPECT_EQ(rep["provenance"]["mu"], "default-not-paper");
  EXPECT_EQ(rep["provenance"]["v0"], "default-not-paper");
  EXPECT_EQ(rep["provenance"]["theta"], "default-not-paper");

  // Re-run from nothing but the echoed config.
  const auto& j = rep["config"];
  cli::ExperimentConfig again;
  again.problem = j["problem"];
  again.prior = j["prior"];
  again.q = j["q"].get<int>();
  again.theta = j["theta"].get<double>();
  again.sigma2 = j["sigma2"];
  again.h = j["h"].get<double>();
  again.R = j["R"];
  again.T = j["T"].get<double>();
  again.h_fine = j["h_fine"];
  again.mu = j["params"]["mu"].get<double>();
  again.v0 = j["params"]["v0"].get<double>();
  again.out = dir / "second";
  (void)cli::run_solve(again);
  EXPECT_EQ(slurp(dir / "first" / "trajectory.csv"), slurp(dir / "second" / "trajectory.csv"));
  EXPECT_EQ(read_json(dir / "second" / "report.json")["provenance"].size(), 0u);
}

TEST(RunSolve, OrbitStepIsFlaggedAsModellingDefault) {
  const auto dir = scratch("solve_orbit");
  (void)cli::run_solve(config("orbit", "iwp", dir));
  const auto rep = read_json(dir / "report.json");
  EXPECT_EQ(rep["provenance"]["h"], "default-not-paper");
  EXPECT_FALSE(rep["config"].contains("theta"));
}

TEST(RunSolve, IwpBeatsIoupOnGrowingExponential) {
  const auto dir = scratch("solve_exp");
  const auto iwp = cli::run_solve(config("exp", "iwp", dir / "iwp"));
  const auto ioup = cli::run_solve(config("exp", "ioup", dir / "ioup"));
  EXPECT_LT(iwp.errors.max_abs[0], ioup.errors.max_abs[0]);
}

TEST(RunSolve, ValidationNamesTheField) {
  const auto dir = scratch("solve_bad");
  auto expect_field = [&](cli::ExperimentConfig c, const std::string& field) {
    try {
      (void)cli::run_solve(c);
      ADD_FAILURE() << "expected ConfigError for " << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << e.what();
    }
  };
  auto c = config("exp", "iwp", dir);
  c.h = 0.0;
  expect_field(c, "h");
  c.h = 0.3;
  expect_field(c, "h");
  c = config("exp", "ioup", dir);
  c.theta = 0.5;
  expect_field(c, "theta");
  c = config("exp", "bogus", dir);
  expect_field(c, "prior");
  c = config("lorenz", "iwp", dir);
  expect_field(c, "problem");
  c = config("orbit", "iwp", dir);
  c.eps = 1.5;
  expect_field(c, "eps");
  c = config("exp", "iwp", dir);
  c.R = -1.0;
  expect_field(c, "R");
  c.R = 0.0;
  c.h_fine = 0.3;
  expect_field(c, "h-fine");
  c.h_fine = 1e-4;
  c.sigma2 = 0.0;
  expect_field(c, "sigma2");
  EXPECT_FALSE(fs::exists(dir / "report.json"));
}

// =============================================================================
// converge
// =============================================================================

TEST(RunConvergence, WritesSlope) {
  const auto dir = scratch("converge");
  auto c = config("exp", "ioup", dir);
  c.q = 1;
  c.hs = {0.2, 0.1, 0.05, 0.025, 0.0125};
  const auto est = cli::run_convergence(c);
  const auto j = read_json(dir / "convergence.json");
  EXPECT_EQ(j["slope"].get<double>(), est.slope);
  EXPECT_GE(est.slope, 1.8);
  EXPECT_LE(est.slope, 2.2);
  EXPECT_EQ(j["errors"].size(), 5u);
  EXPECT_EQ(j["expected_order"], 2);

  c.q = 2;
  const auto second = cli::run_convergence(c);
  EXPECT_GE(second.slope, 2.8);
  EXPECT_LE(second.slope, 3.2);
}

TEST(RunConvergence, RejectsShortStepList) {
  auto c = config("exp", "ioup", scratch("converge_bad"));
  try {
    (void)cli::run_convergence(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "hs");
  }
  c.hs = {0.2, 0.1, 0.05};
  EXPECT_THROW((void)cli::run_convergence(c), ConfigError);
}

// =============================================================================
// sample
// =============================================================================

TEST(RunSamples, DeterministicFiles) {
  const auto dir = scratch("samples");
  auto c = config("exp", "ioup", dir / "a");
  c.theta = -1.0;
  c.n_paths = 8;
  c.seed = 42;
  (void)cli::run_samples(c);
  c.out = dir / "b";
  (void)cli::run_samples(c);
  const std::string a = slurp(dir / "a" / "samples.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "samples.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "t,path_0,path_1,path_2,path_3,path_4,path_5,path_6,path_7");
  c.seed = 43;
  c.out = dir / "c";
  (void)cli::run_samples(c);
  EXPECT_NE(a, slurp(dir / "c" / "samples.csv"));
}

TEST(RunSamples, TerminalVariances) {
  const auto dir = scratch("samples_var");
  auto ou = config("exp", "ioup", dir / "ou");
  ou.theta = -1.0;
  ou.n_paths = 10000;
  ou.h = 0.1;
  const auto s_ou = cli::run_samples(ou);
  std::ifstream in(dir / "ou" / "samples.csv");
  const auto table = io::read_csv(in);
  const auto& last = table.rows.back();
  EXPECT_DOUBLE_EQ(last[0], 10.0);
  double mean = 0.0;
  for (std::size_t k = 1; k < last.size(); ++k) mean += last[k];
  mean /= 10000.0;
  double var = 0.0;
  for (std::size_t k = 1; k < last.size(); ++k) var += (last[k] - mean) * (last[k] - mean);
  var /= 9999.0;
  EXPECT_NEAR(var, 0.5, 0.025);

  auto w = config("exp", "iwp", dir / "w");
  w.n_paths = 10000;
  w.T = 1.0;
  w.h = 0.05;
  const auto s_w = cli::run_samples(w);
  const Eigen::RowVectorXd end = s_w.coords[1].row(20);
  const double wv = (end.array() - end.mean()).square().sum() / 9999.0;
  EXPECT_NEAR(wv, 1.0, 0.05);
}

TEST(RunSamples, RejectsBadComponent) {
  auto c = config("exp", "iwp", scratch("samples_bad"));
  c.component = 5;
  EXPECT_THROW((void)cli::run_samples(c), ConfigError);
  c.component.reset();
  c.n_paths = 0;
  EXPECT_THROW((void)cli::run_samples(c), ConfigError);
}

// =============================================================================
// suite
// =============================================================================

TEST(RunSuite, SummaryRowsAndWinners) {
  const auto dir = scratch("suite");
  std::ostringstream log;
  const auto rows = cli::run_suite(dir, log);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.problem << " " << r.prior;
    EXPECT_TRUE(fs::exists(dir / (r.problem + "_" + r.prior) / "report.json"));
  }
  auto winner = [&](const std::string& problem) {
    for (const auto& r : rows) {
      if (r.problem == problem) return r.winner;
    }
    return std::string();
  };
  EXPECT_EQ(winner("exp"), "iwp");
  // IOUP is ahead on x8 but narrowly behind on x7.
  EXPECT_EQ(winner("decay_chain"), "split");
  EXPECT_EQ(winner("orbit"), "iwp");

  std::ifstream in(dir / "summary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "problem,prior,q,theta,h,T,focus,max_abs_error,status,winner,expected,expectation_holds");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 10);
  EXPECT_NE(log.str().find("orbit: winner=iwp"), std::string::npos);
}
