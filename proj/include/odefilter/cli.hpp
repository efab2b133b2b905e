#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "odefilter/analysis.hpp"
#include "odefilter/filter.hpp"

namespace odefilter::cli {

// Settings for one experiment. Unset optionals take per-problem defaults in resolve().
struct ExperimentConfig {
  std::string problem = "neg_exp";
  std::optional<double> eps;
  std::optional<double> mu;
  std::optional<double> v0;
  std::optional<double> T;

  std::string prior = "ioup";
  std::optional<int> q;
  std::optional<double> theta;
  double sigma2 = 1.0;
  std::optional<double> h;
  double R = 0.0;
  double h_fine = 1e-4;

  std::filesystem::path out = "out";
  std::uint64_t seed = 42;

  std::vector<double> hs;
  int n_paths = 10;
  std::optional<int> component;
};

// A config with every optional filled in, plus the fields whose values were defaulted
// without support from the source experiments ("default-not-paper").
struct ResolvedConfig {
  ExperimentConfig config;
  nlohmann::json provenance = nlohmann::json::object();
};

[[nodiscard]] ResolvedConfig resolve(const ExperimentConfig& cfg);

// Throws ConfigError naming the offending flag.
void validate_solve(const ResolvedConfig& rc);

[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& cfg);
[[nodiscard]] StateSpacePrior make_prior(const ExperimentConfig& cfg);
[[nodiscard]] IVProblem make_problem(const ExperimentConfig& cfg);

struct SolveOutcome {
  FilterTrajectory trajectory;
  ErrorReport errors;
  nlohmann::json report;
};

// Writes <out>/trajectory.csv and <out>/report.json.
SolveOutcome run_solve(const ExperimentConfig& cfg);

struct SuiteRow {
  std::string problem;
  std::string prior;
  ExperimentConfig config;
  std::vector<int> focus;
  std::vector<double> focus_errors;  // max-abs error per focus component
  double focus_error = 0.0;          // largest of focus_errors
  std::string status = "ok";
  std::string winner;
  std::string expected;
};

// The reference experiment settings for one problem (prior left as given).
[[nodiscard]] ExperimentConfig suite_config(const std::string& problem, const std::string& prior);

// Both priors on every registered problem. Writes <outdir>/<problem>_<prior>/ per
// experiment and <outdir>/summary.csv last; prints one verdict line per problem.
std::vector<SuiteRow> run_suite(const std::filesystem::path& outdir, std::ostream& log);

// Writes <out>/convergence.json.
OrderEstimate run_convergence(const ExperimentConfig& cfg);

// Writes <out>/samples.csv for cfg.component (default: the last state component).
PriorSamples run_samples(const ExperimentConfig& cfg);

}  // namespace odefilter::cli
