#pragma once

#include <Eigen/Dense>

namespace odefilter {

enum class PriorKind { IWP, IOUP };

// Gauss-Markov prior dX = F X dt + L dW on (x, x', ..., x^(q)).
//
// IWP: last row of F is zero. IOUP: last row of F is zero except F(q,q) = theta < 0.
// sigma2 is the diffusion intensity, L = (0, ..., 0, sqrt(sigma2)).
class StateSpacePrior {
 public:
  static StateSpacePrior iwp(int q, double sigma2 = 1.0);
  static StateSpacePrior ioup(int q, double theta, double sigma2 = 1.0);

  [[nodiscard]] int q() const noexcept { return q_; }
  [[nodiscard]] int dim() const noexcept { return q_ + 1; }
  [[nodiscard]] PriorKind kind() const noexcept { return kind_; }
  // OU drift (theta < 0). Zero for IWP.
  [[nodiscard]] double theta() const noexcept { return theta_; }
  [[nodiscard]] double sigma2() const noexcept { return sigma2_; }

 private:
  StateSpacePrior(int q, PriorKind kind, double theta, double sigma2);

  int q_;
  PriorKind kind_;
  double theta_;
  double sigma2_;
};

struct DriftDiffusion {
  Eigen::MatrixXd F;
  Eigen::VectorXd L;
};

// Exact discretization over a step h: x_{n+1} ~ N(A x_n, Q).
struct TransitionPair {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Q;
  double h = 0.0;
};

[[nodiscard]] DriftDiffusion drift_and_diffusion(const StateSpacePrior& prior);

// Closed-form integrated Wiener process transition.
[[nodiscard]] TransitionPair iwp_transition(int q, double h, double sigma2);

// Closed-form integrated Ornstein-Uhlenbeck transition, theta < 0.
//
// The exponential remainders e^{theta h} - sum_{k<m} (theta h)^k / k! are summed as
// their Taylor tail when |theta h| < 1; Q uses the matching double power series in
// that regime and the integration-by-parts recursion otherwise.
[[nodiscard]] TransitionPair ioup_transition(int q, double h, double theta, double sigma2);

// Dispatches on prior.kind().
[[nodiscard]] TransitionPair transition(const StateSpacePrior& prior, double h);

// Matrix exponential by scaling and squaring of the order-13 Taylor series.
[[nodiscard]] Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

// Reference discretization of an arbitrary LTI-SDE: A = expm(F h) and
// Q = int_0^h expm(F s) L L^T expm(F s)^T ds by composite 16-point Gauss-Legendre
// with n_quad nodes in total (rounded down to whole panels).
[[nodiscard]] TransitionPair mfd_transition_oracle(const Eigen::MatrixXd& F,
                                                   const Eigen::VectorXd& L, double h,
                                                   int n_quad = 64);

}  // namespace odefilter
