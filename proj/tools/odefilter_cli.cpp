// Command-line front end: solve, suite, converge, sample.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "odefilter/cli.hpp"
#include "odefilter/errors.hpp"
#include "odefilter/io.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

using odefilter::cli::ExperimentConfig;

void add_prior_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--prior", cfg.prior, "Prior family: iwp or ioup")->capture_default_str();
  cmd->add_option("--q", cfg.q, "Number of modeled derivatives");
  cmd->add_option("--theta", cfg.theta, "OU drift parameter (negative)");
  cmd->add_option("--sigma2", cfg.sigma2, "Diffusion intensity")->capture_default_str();
  cmd->add_option("--h", cfg.h, "Step size");
  cmd->add_option("--T", cfg.T, "Horizon");
}

void add_problem_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--problem", cfg.problem, "exp, neg_exp, orbit, van_der_pol or decay_chain")
      ->capture_default_str();
  cmd->add_option("--eps", cfg.eps, "Orbit eccentricity");
  cmd->add_option("--mu", cfg.mu, "Van der Pol damping");
  cmd->add_option("--v0", cfg.v0, "Van der Pol initial derivative x'(0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman ODE filter with integrated Wiener and integrated Ornstein-Uhlenbeck priors"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string suite_out = "suite";

  auto* solve = app.add_subcommand("solve", "Run one filter solve and compare to an RK4 reference");
  add_problem_flags(solve, cfg);
  add_prior_flags(solve, cfg);
  solve->add_option("--R", cfg.R, "Measurement noise variance")->capture_default_str();
  solve->add_option("--h-fine", cfg.h_fine, "Reference RK4 step")->capture_default_str();
  solve->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  solve->add_option("--seed", cfg.seed, "Unused by solve; echoed in the report");

  auto* suite = app.add_subcommand("suite", "Run every problem under both priors");
  suite->add_option("--out", suite_out, "Output directory")->capture_default_str();

  auto* converge = app.add_subcommand("converge", "Estimate the first-step convergence order");
  add_problem_flags(converge, cfg);
  add_prior_flags(converge, cfg);
  converge->add_option("--hs", cfg.hs, "Descending step sizes (at least 4)")->delimiter(',');
  converge->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Draw exact samples from a prior");
  add_prior_flags(sample, cfg);
  sample->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sample->add_option("--n-paths", cfg.n_paths, "Number of paths")->capture_default_str();
  sample->add_option("--component", cfg.component, "State component to write (default q)");
  sample->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*solve) {
      const auto outcome = odefilter::cli::run_solve(cfg);
      std::cout << "max_abs_error";
      for (double e : outcome.errors.max_abs) std::cout << " " << odefilter::io::format_double(e);
      std::cout << "\nwrote " << (cfg.out / "trajectory.csv").string() << " and "
                << (cfg.out / "report.json").string() << "\n";
    } else if (*suite) {
      odefilter::cli::run_suite(suite_out, std::cout);
      std::cout << "wrote " << suite_out << "/summary.csv\n";
    } else if (*converge) {
      const auto est = odefilter::cli::run_convergence(cfg);
      if (est.exact) {
        std::cout << "all first-step errors below the floor: exact\n";
      } else {
        std::cout << "slope " << est.slope << "\n";
      }
    } else if (*sample) {
      (void)odefilter::cli::run_samples(cfg);
      std::cout << "wrote " << (cfg.out / "samples.csv").string() << "\n";
    }
  } catch (const odefilter::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const odefilter::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
