#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace odefilter {

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

// A scalar function of the state that is conserved (or otherwise known) along solutions.
struct Invariant {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> fn;
};

// First-order initial value problem x' = f(t, x), x(0) = x0 on [0, T].
struct IVProblem {
  std::string name;
  int d = 0;
  VectorField f;
  Eigen::VectorXd x0;
  double T = 0.0;
  std::vector<Invariant> invariants;
  // Optional: returns the (order+1) x d matrix of x^{(k)}(0), k = 0..order.
  std::function<Eigen::MatrixXd(int order)> initial_derivatives;
  // Optional: closed-form solution x(t).
  std::function<Eigen::VectorXd(double t)> exact_solution;
};

// Named problem parameters: eps (orbit), mu and v0 (Van der Pol), T (all).
using ProblemParams = std::map<std::string, double>;

// One of: exp, neg_exp, orbit, van_der_pol, decay_chain.
// Throws std::invalid_argument on an unknown name or out-of-range parameter.
[[nodiscard]] IVProblem make_problem(std::string_view name, const ProblemParams& params = {});

[[nodiscard]] const std::vector<std::string>& problem_names();

// x' = M x with x(0) = x0; supplies Taylor derivatives and the matrix-exponential solution.
[[nodiscard]] IVProblem linear_problem(std::string name, const Eigen::MatrixXd& M,
                                       const Eigen::VectorXd& x0, double T);

struct ReferenceTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

// Classical RK4 with fixed step h_fine. Every query time must lie in [0, T] and be an
// integer multiple of h_fine (to 0.5e-9 in units of h_fine).
[[nodiscard]] ReferenceTrajectory rk_reference(const IVProblem& problem, double h_fine,
                                               std::span<const double> query_times);

}  // namespace odefilter
