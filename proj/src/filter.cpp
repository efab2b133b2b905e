#include "odefilter/filter.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "odefilter/errors.hpp"

namespace odefilter {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& P) { return 0.5 * (P + P.transpose()); }

}  // namespace

std::vector<double> FilterTrajectory::times() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.t);
  return out;
}

long grid_steps(double T, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("step size h must be positive, got " + std::to_string(h));
  }
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  const double ratio = T / h;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 0.5e-9 || n < 1.0) {
    throw std::invalid_argument("T/h = " + std::to_string(ratio) +
                                " is not an integer; the grid must land on T");
  }
  return static_cast<long>(n);
}

GaussianState initialize(const IVProblem& problem, int q, double p0_scale) {
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  const Eigen::VectorXd f0 = problem.f(0.0, problem.x0);
  if (!f0.allFinite()) throw NumericalError("f(0, x0) is not finite for '" + problem.name + "'");

  GaussianState s;
  s.t = 0.0;
  s.mean = Eigen::MatrixXd::Zero(q + 1, problem.d);
  s.mean.row(0) = problem.x0.transpose();
  s.mean.row(1) = f0.transpose();
  s.cov = Eigen::MatrixXd::Zero(q + 1, q + 1);
  s.cov.bottomRightCorner(q, q) = p0_scale * Eigen::MatrixXd::Identity(q, q);
  return s;
}

GaussianState predict(const GaussianState& state, const TransitionPair& tp) {
  GaussianState out;
  out.t = state.t + tp.h;
  out.mean = tp.A * state.mean;
  out.cov = symmetrized(tp.A * state.cov * tp.A.transpose() + tp.Q);
  return out;
}

GaussianState update(const GaussianState& predicted, const Eigen::VectorXd& z,
                     const MeasurementModel& mm) {
  constexpr Eigen::Index k = MeasurementModel::kObservedIndex;
  if (z.size() != predicted.mean.cols()) throw std::invalid_argument("update: z has wrong size");

  const Eigen::VectorXd residual = z - predicted.mean.row(k).transpose();
  const double S = predicted.cov(k, k) + mm.R;

  if (S <= kDegenerateInnovation) {
    if (residual.cwiseAbs().maxCoeff() > kDegenerateResidual) {
      std::ostringstream msg;
      msg << "innovation variance " << S << " is degenerate but residual is "
          << residual.cwiseAbs().maxCoeff();
      throw FilterDivergence(-1, msg.str());
    }
    return predicted;
  }

  const Eigen::VectorXd gain = predicted.cov.col(k) / S;
  GaussianState out;
  out.t = predicted.t;
  out.mean = predicted.mean + gain * residual.transpose();
#ifdef ODEFILTER_JOSEPH_UPDATE
  Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(gain.size(), gain.size());
  IKH.col(k) -= gain;
  out.cov = symmetrized(IKH * predicted.cov * IKH.transpose() + mm.R * gain * gain.transpose());
#else
  out.cov = symmetrized(predicted.cov - gain * S * gain.transpose());
#endif
  return out;
}

FilterTrajectory solve_ivp(const IVProblem& problem, const StateSpacePrior& prior, double h,
                           double R, double p0_scale) {
  const long n_steps = grid_steps(problem.T, h);
  if (!(R >= 0.0)) throw std::invalid_argument("measurement variance R must be >= 0");

  const TransitionPair tp = transition(prior, h);
  const MeasurementModel mm{R};

  FilterTrajectory traj;
  traj.q = prior.q();
  traj.d = problem.d;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(initialize(problem, prior.q(), p0_scale));

  for (long n = 1; n <= n_steps; ++n) {
    GaussianState pred = predict(traj.states.back(), tp);
    pred.t = n * h;
    const Eigen::VectorXd x_pred = pred.mean.row(0).transpose();
    const Eigen::VectorXd z = problem.f(pred.t, x_pred);
    if (!z.allFinite()) {
      std::ostringstream msg;
      msg << "f evaluated to a non-finite value at step " << n << ", t=" << pred.t << ", x=("
          << x_pred.transpose() << ")";
      throw NumericalError(msg.str());
    }
    try {
      traj.states.push_back(update(pred, z, mm));
    } catch (const FilterDivergence& e) {
      throw FilterDivergence(n, e.what());
    }
  }
  return traj;
}

}  // namespace odefilter
