#include "odefilter/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "odefilter/errors.hpp"
#include "odefilter/priors.hpp"

namespace odefilter {

namespace {

double param_or(const ProblemParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double horizon(const ProblemParams& params, double fallback) {
  const double T = param_or(params, "T", fallback);
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument("horizon T must be positive, got " + std::to_string(T));
  }
  return T;
}

IVProblem orbit(const ProblemParams& params) {
  const double eps = param_or(params, "eps", 0.1);
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("orbit eccentricity eps must lie in (0, 1), got " +
                                std::to_string(eps));
  }
  IVProblem p;
  p.name = "orbit";
  p.d = 4;
  p.T = horizon(params, 10.0);
  p.x0 = Eigen::Vector4d(1.0 - eps, 0.0, 0.0, std::sqrt((1.0 + eps) / (1.0 - eps)));
  p.f = [](double, const Eigen::VectorXd& y) {
    const double r2 = y(0) * y(0) + y(1) * y(1);
    const double r3 = r2 * std::sqrt(r2);
    Eigen::VectorXd dy(4);
    dy << y(2), y(3), -y(0) / r3, -y(1) / r3;
    return dy;
  };
  p.invariants = {
      {"energy",
       [](const Eigen::VectorXd& y) {
         return 0.5 * (y(2) * y(2) + y(3) * y(3)) - 1.0 / std::sqrt(y(0) * y(0) + y(1) * y(1));
       }},
      {"angular_momentum", [](const Eigen::VectorXd& y) { return y(0) * y(3) - y(1) * y(2); }},
  };
  return p;
}

// x'' - mu (1 - x^2) x' + x = 0 as the system (x, x').
IVProblem van_der_pol(const ProblemParams& params) {
  const double mu = param_or(params, "mu", 1.0);
  const double v0 = param_or(params, "v0", 1.0);
  if (!std::isfinite(mu) || !std::isfinite(v0)) {
    throw std::invalid_argument("van_der_pol parameters must be finite");
  }
  IVProblem p;
  p.name = "van_der_pol";
  p.d = 2;
  p.T = horizon(params, 20.0);
  p.x0 = Eigen::Vector2d(0.0, v0);
  p.f = [mu](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(2);
    dy << y(1), mu * (1.0 - y(0) * y(0)) * y(1) - y(0);
    return dy;
  };
  if (mu == 0.0) {
    p.invariants = {{"radius2", [](const Eigen::VectorXd& y) { return y(0) * y(0) + y(1) * y(1); }}};
  }
  return p;
}

IVProblem decay_chain(const ProblemParams& params) {
  constexpr int n = 10;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) {
    M(i, i) = -(i + 1.0);
    M(i + 1, i) = i + 1.0;
  }
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0(0) = 1.0;
  IVProblem p = linear_problem("decay_chain", M, x0, horizon(params, 10.0));
  p.invariants = {{"total_mass", [](const Eigen::VectorXd& x) { return x.sum(); }}};
  return p;
}

IVProblem scalar_exponential(std::string name, double rate, const ProblemParams& params) {
  IVProblem p = linear_problem(std::move(name), Eigen::MatrixXd::Constant(1, 1, rate),
                               Eigen::VectorXd::Ones(1), horizon(params, 10.0));
  p.exact_solution = [rate](double t) { return Eigen::VectorXd::Constant(1, std::exp(rate * t)); };
  return p;
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"exp", "neg_exp", "orbit", "van_der_pol",
                                              "decay_chain"};
  return names;
}

IVProblem linear_problem(std::string name, const Eigen::MatrixXd& M, const Eigen::VectorXd& x0,
                         double T) {
  if (M.rows() != M.cols() || M.rows() != x0.size()) {
    throw std::invalid_argument("linear_problem: dimension mismatch");
  }
  IVProblem p;
  p.name = std::move(name);
  p.d = static_cast<int>(x0.size());
  p.x0 = x0;
  p.T = T;
  p.f = [M](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return M * x; };
  p.initial_derivatives = [M, x0](int order) {
    Eigen::MatrixXd D(order + 1, x0.size());
    Eigen::VectorXd v = x0;
    for (int k = 0; k <= order; ++k) {
      D.row(k) = v.transpose();
      v = M * v;
    }
    return D;
  };
  p.exact_solution = [M, x0](double t) -> Eigen::VectorXd { return expm(M * t) * x0; };
  return p;
}

IVProblem make_problem(std::string_view name, const ProblemParams& params) {
  if (name == "exp") return scalar_exponential("exp", 1.0, params);
  if (name == "neg_exp") return scalar_exponential("neg_exp", -1.0, params);
  if (name == "orbit") return orbit(params);
  if (name == "van_der_pol") return van_der_pol(params);
  if (name == "decay_chain") return decay_chain(params);
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

ReferenceTrajectory rk_reference(const IVProblem& problem, double h_fine,
                                 std::span<const double> query_times) {
  if (!(h_fine > 0.0)) throw std::invalid_argument("h_fine must be positive");

  std::vector<long> steps(query_times.size());
  for (std::size_t k = 0; k < query_times.size(); ++k) {
    const double t = query_times[k];
    if (t < 0.0 || t > problem.T * (1.0 + 1e-12)) {
      throw std::invalid_argument("query time " + std::to_string(t) + " outside [0, T]");
    }
    const double ratio = t / h_fine;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 0.5e-9 * std::max(1.0, rounded)) {
      throw std::invalid_argument("query time " + std::to_string(t) +
                                  " is not a multiple of h_fine");
    }
    steps[k] = static_cast<long>(rounded);
  }

  ReferenceTrajectory ref;
  ref.times.assign(query_times.begin(), query_times.end());
  ref.states.resize(query_times.size());

  std::vector<std::size_t> order(steps.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return steps[a] < steps[b]; });

  const auto& f = problem.f;
  Eigen::VectorXd x = problem.x0;
  long n = 0;
  for (std::size_t idx : order) {
    for (; n < steps[idx]; ++n) {
      const double t = n * h_fine;
      const Eigen::VectorXd k1 = f(t, x);
      const Eigen::VectorXd k2 = f(t + 0.5 * h_fine, x + 0.5 * h_fine * k1);
      const Eigen::VectorXd k3 = f(t + 0.5 * h_fine, x + 0.5 * h_fine * k2);
      const Eigen::VectorXd k4 = f(t + h_fine, x + h_fine * k3);
      x += (h_fine / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!x.allFinite()) {
        std::ostringstream msg;
        msg << "reference integration of '" << problem.name << "' produced a non-finite state at t="
            << (n + 1) * h_fine;
        throw NumericalError(msg.str());
      }
    }
    ref.states[idx] = x;
  }
  return ref;
}

}  // namespace odefilter
