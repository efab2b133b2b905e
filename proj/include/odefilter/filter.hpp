#pragma once

#include <vector>

#include <Eigen/Dense>

#include "odefilter/priors.hpp"
#include "odefilter/problems.hpp"

namespace odefilter {

// Gaussian belief over (x, x', ..., x^(q)) for every ODE dimension.
//
// mean is (q+1) x d: column j holds the estimates for dimension j. The covariance is
// (q+1) x (q+1) and shared by all d dimensions, since A, Q, H, R and P0 do not depend on j.
struct GaussianState {
  double t = 0.0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd cov;
};

// z = H x + r, r ~ N(0, R), with H selecting the first derivative.
struct MeasurementModel {
  static constexpr Eigen::Index kObservedIndex = 1;
  double R = 0.0;
};

struct FilterTrajectory {
  int q = 0;
  int d = 0;
  std::vector<GaussianState> states;

  [[nodiscard]] std::vector<double> times() const;
};

// Predicted innovation variance below this is treated as zero.
inline constexpr double kDegenerateInnovation = 1e-14;
// Largest residual tolerated when the innovation variance is degenerate.
inline constexpr double kDegenerateResidual = 1e-8;

// mean = (x0, f(0, x0), 0, ..., 0), cov = p0_scale on the trailing q x q block.
[[nodiscard]] GaussianState initialize(const IVProblem& problem, int q, double p0_scale = 1.0);

[[nodiscard]] GaussianState predict(const GaussianState& state, const TransitionPair& tp);

// Conditions on z (one value per ODE dimension). Throws FilterDivergence when the
// innovation variance is degenerate but the residual is not.
[[nodiscard]] GaussianState update(const GaussianState& predicted, const Eigen::VectorXd& z,
                                   const MeasurementModel& mm);

// Kalman ODE filter on the fixed grid t_n = n h, n = 0..N with N h = T.
// Returns N+1 filtering states, the initial one included.
[[nodiscard]] FilterTrajectory solve_ivp(const IVProblem& problem, const StateSpacePrior& prior,
                                         double h, double R = 0.0, double p0_scale = 1.0);

// Number of steps N with N h = T; throws std::invalid_argument when T/h is off-grid.
[[nodiscard]] long grid_steps(double T, double h);

}  // namespace odefilter
