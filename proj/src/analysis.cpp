#include "odefilter/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "odefilter/errors.hpp"

namespace odefilter {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform on (0, 1), never exactly 0 or 1.
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Symmetric factor G with G G^T = Q. Falls back to eigenvalue clipping when Q is
// only semi-definite.
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& Q) {
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

ErrorReport error_report(const FilterTrajectory& traj, const ReferenceTrajectory& ref) {
  if (traj.states.size() != ref.times.size()) {
    throw std::invalid_argument("error_report: trajectory has " + std::to_string(traj.states.size()) +
                                " points, reference has " + std::to_string(ref.times.size()));
  }
  const int d = traj.d;
  ErrorReport rep{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0),
                  std::vector<double>(d, 0.0)};
  if (traj.states.empty()) return rep;

  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const auto& s = traj.states[n];
    if (std::abs(s.t - ref.times[n]) > 1e-9 * std::max(1.0, std::abs(s.t))) {
      throw std::invalid_argument("error_report: grid mismatch at index " + std::to_string(n));
    }
    if (ref.states[n].size() != d) throw std::invalid_argument("error_report: dimension mismatch");
    for (int j = 0; j < d; ++j) {
      const double e = std::abs(s.mean(0, j) - ref.states[n](j));
      rep.max_abs[j] = std::max(rep.max_abs[j], e);
      rep.rmse[j] += e * e;
      if (n + 1 == traj.states.size()) rep.terminal[j] = e;
    }
  }
  for (auto& r : rep.rmse) r = std::sqrt(r / static_cast<double>(traj.states.size()));
  return rep;
}

OrderEstimate local_order_estimate(const StateSpacePrior& prior, const IVProblem& problem,
                                   std::span<const double> hs) {
  if (!problem.initial_derivatives) {
    throw std::invalid_argument("local_order_estimate: problem '" + problem.name +
                                "' does not supply initial derivatives");
  }
  if (hs.size() < 4) throw std::invalid_argument("local_order_estimate: need at least 4 step sizes");
  for (std::size_t k = 0; k < hs.size(); ++k) {
    if (!(hs[k] > 0.0) || hs[k] > 0.5) {
      throw std::invalid_argument("local_order_estimate: step sizes must lie in (0, 0.5]");
    }
    if (k > 0 && !(hs[k] < hs[k - 1])) {
      throw std::invalid_argument("local_order_estimate: step sizes must be strictly descending");
    }
  }

  const Eigen::MatrixXd m0 = problem.initial_derivatives(prior.q());
  OrderEstimate est;
  est.hs.assign(hs.begin(), hs.end());

  for (double h : hs) {
    const TransitionPair tp = transition(prior, h);
    const Eigen::VectorXd predicted = (tp.A.row(0) * m0).transpose();
    Eigen::VectorXd truth;
    if (problem.exact_solution) {
      truth = problem.exact_solution(h);
    } else {
      IVProblem local = problem;
      local.T = h;
      const double t[] = {h};
      truth = rk_reference(local, h / 1000.0, t).states.front();
    }
    est.errors.push_back((predicted - truth).norm());
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < est.hs.size(); ++k) {
    if (!(est.errors[k] > kOrderFitFloor)) continue;
    const double x = std::log(est.hs[k]);
    const double y = std::log(est.errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n == 0) {
    est.exact = true;
    est.slope = std::numeric_limits<double>::infinity();
    est.intercept = -std::numeric_limits<double>::infinity();
    return est;
  }
  if (n < 2) {
    throw NumericalError("local_order_estimate: fewer than two errors above the floor");
  }
  est.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  est.intercept = (sy - est.slope * sx) / n;
  return est;
}

double iou_integral_variance(double theta_pos, double sigma2, double T) {
  if (!(theta_pos > 0.0)) {
    throw std::invalid_argument("iou_integral_variance: theta must be positive, got " +
                                std::to_string(theta_pos));
  }
  if (!(T > 0.0)) throw std::invalid_argument("iou_integral_variance: T must be positive");
  // e^{-theta T} - 1 via expm1; the bracket still cancels to O((theta T)^3).
  const long double th = theta_pos;
  const long double x = th * static_cast<long double>(T);
  const long double em1 = std::expm1(-x);
  return static_cast<double>(sigma2 / (2.0L * th * th * th) * (2.0L * x + 2.0L * em1 - em1 * em1));
}

double wiener_integral_variance(double sigma2, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("wiener_integral_variance: T must be positive");
  return sigma2 * T * T * T / 3.0;
}

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint64_t component) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ path);
  key = splitmix64(key ^ step);
  key = splitmix64(key ^ component);
  const double u1 = to_open_unit(key);
  const double u2 = to_open_unit(splitmix64(key));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PriorSamples sample_prior(const StateSpacePrior& prior, double h, int n_steps, int n_paths,
                          std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("sample_prior: n_paths must be >= 1");
  if (n_steps < 1) throw std::invalid_argument("sample_prior: n_steps must be >= 1");
  const TransitionPair tp = transition(prior, h);
  const Eigen::MatrixXd G = noise_factor(tp.Q);
  const int dim = prior.dim();

  PriorSamples out;
  out.times.resize(static_cast<std::size_t>(n_steps) + 1);
  for (int n = 0; n <= n_steps; ++n) out.times[n] = n * h;
  out.coords.assign(dim, Eigen::MatrixXd::Zero(n_steps + 1, n_paths));

  Eigen::VectorXd x(dim);
  Eigen::VectorXd xi(dim);
  for (int p = 0; p < n_paths; ++p) {
    x.setZero();
    for (int n = 1; n <= n_steps; ++n) {
      for (int k = 0; k < dim; ++k) xi(k) = counter_normal(seed, p, n, k);
      x = tp.A * x + G * xi;
      for (int k = 0; k < dim; ++k) out.coords[k](n, p) = x(k);
    }
  }
  return out;
}

}  // namespace odefilter
