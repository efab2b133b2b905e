#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "odefilter/filter.hpp"
#include "odefilter/priors.hpp"
#include "odefilter/problems.hpp"

namespace odefilter {

// Errors of the solution estimate (mean row 0) against a reference, per ODE dimension.
struct ErrorReport {
  std::vector<double> max_abs;
  std::vector<double> rmse;
  std::vector<double> terminal;
};

[[nodiscard]] ErrorReport error_report(const FilterTrajectory& traj, const ReferenceTrajectory& ref);

// Least-squares fit log(error) = slope * log(h) + intercept.
struct OrderEstimate {
  std::vector<double> hs;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  // Every error was at or below the floor, so no fit was made.
  bool exact = false;
};

// Errors at or below this are dropped from the fit.
inline constexpr double kOrderFitFloor = 1e-14;

// One-step prediction error |m^-(h)_0 - x(h)| starting from the Taylor-exact state
// (x0, x0', ..., x0^(q)). The problem must supply initial_derivatives; the exact
// solution falls back to fine RK4 when the problem has no closed form.
[[nodiscard]] OrderEstimate local_order_estimate(const StateSpacePrior& prior,
                                                 const IVProblem& problem,
                                                 std::span<const double> hs);

// Var(int_0^T X_s ds) for an OU process X_0 = 0, dX = -theta_pos X dt + sigma dW.
// Note the positive-rate convention, unlike StateSpacePrior::theta().
[[nodiscard]] double iou_integral_variance(double theta_pos, double sigma2, double T);

// Var(int_0^T W_s ds) = sigma2 T^3 / 3.
[[nodiscard]] double wiener_integral_variance(double sigma2, double T);

// Standard normal variate indexed by (seed, path, step, component). Stateless SplitMix64
// counter hashing followed by Box-Muller, so any subset of variates can be regenerated.
[[nodiscard]] double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                    std::uint64_t component);

struct PriorSamples {
  std::vector<double> times;
  // coords[k](n, p): component k of path p at times[n].
  std::vector<Eigen::MatrixXd> coords;
};

// Exact discrete sampling x_{n+1} ~ N(A(h) x_n, Q(h)) from x_0 = 0.
[[nodiscard]] PriorSamples sample_prior(const StateSpacePrior& prior, double h, int n_steps,
                                        int n_paths, std::uint64_t seed);

}  // namespace odefilter
