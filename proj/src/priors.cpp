#include "odefilter/priors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace odefilter {

namespace {

constexpr int kMaxSeriesTerms = 200;
constexpr long double kSeriesRelTol = 1e-19L;

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

long double factorial(int n) {
  long double f = 1.0L;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void check_common(int q, double h, double sigma2) {
  if (q < 1) throw std::invalid_argument("q must be >= 1, got " + std::to_string(q));
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("step size h must be positive and finite, got " + std::to_string(h));
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive, got " + std::to_string(sigma2));
  }
}

// sum_{k>=m} theta^{k-m} h^k / k!, i.e. (e^{theta h} - sum_{k<m} (theta h)^k / k!) / theta^m.
long double exp_remainder(int m, long double theta, long double h) {
  if (m == 0) return std::exp(theta * h);
  const long double x = theta * h;
  if (std::fabs(x) < 1.0L) {
    long double term = std::pow(h, m) / factorial(m);
    long double sum = term;
    for (int n = 1; n < kMaxSeriesTerms; ++n) {
      term *= x / static_cast<long double>(n + m);
      sum += term;
      if (std::fabs(term) < kSeriesRelTol * std::fabs(sum)) break;
    }
    return sum;
  }
  long double partial = 0.0L;
  long double term = 1.0L;
  for (int k = 0; k < m; ++k) {
    partial += term;
    term *= x / static_cast<long double>(k + 1);
  }
  return (std::exp(x) - partial) / std::pow(theta, m);
}

// int_0^h phi_a(s) phi_b(s) ds with phi_m(s) = sum_n theta^n s^{n+m} / (n+m)!, expanded as a
// double power series in theta h. Converges for all theta h; used where |theta h| < 1.
long double ioup_q_series(int ma, int mb, long double theta, long double h) {
  const long double x = theta * h;
  const long double base = std::pow(h, ma + mb + 1);
  long double x_pow = 1.0L;
  long double sum = 0.0L;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    long double coeff = 0.0L;
    for (int n1 = 0; n1 <= n; ++n1) {
      coeff += 1.0L / (factorial(n1 + ma) * factorial(n - n1 + mb));
    }
    const long double term = x_pow * base * coeff / static_cast<long double>(n + ma + mb + 1);
    sum += term;
    if (n > 0 && std::fabs(term) < kSeriesRelTol * std::fabs(sum)) break;
    x_pow *= x;
  }
  return sum;
}

// Closed form via I_k(h) = theta^{k-1} e^{theta h} h^k / k! - I_{k-1}(h),
// I_0(h) = (e^{theta h} - 1) / theta.
long double ioup_q_closed(int q, int ma, int mb, long double theta, long double h) {
  const long double e1 = std::exp(theta * h);
  const long double e2 = std::exp(2.0L * theta * h);

  std::vector<long double> ik(static_cast<std::size_t>(q));
  ik[0] = (e1 - 1.0L) / theta;
  for (int k = 1; k < q; ++k) {
    ik[k] = std::pow(theta, k - 1) * e1 * std::pow(h, k) / factorial(k) - ik[k - 1];
  }

  CompensatedSum brace;
  brace.add((e2 - 1.0L) / (2.0L * theta));
  for (int k = 0; k < ma; ++k) brace.add(-ik[k]);
  for (int k = 0; k < mb; ++k) brace.add(-ik[k]);
  for (int k1 = 0; k1 < ma; ++k1) {
    for (int k2 = 0; k2 < mb; ++k2) {
      const int p = k1 + k2;
      brace.add(std::pow(theta, p) / (factorial(k1) * factorial(k2)) * std::pow(h, p + 1) /
                static_cast<long double>(p + 1));
    }
  }
  return brace.value() / std::pow(theta, ma + mb);
}

struct GaussLegendre16 {
  std::array<double, 16> nodes{};
  std::array<double, 16> weights{};

  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre16& gauss_legendre16() {
  static const GaussLegendre16 rule;
  return rule;
}

}  // namespace

StateSpacePrior::StateSpacePrior(int q, PriorKind kind, double theta, double sigma2)
    : q_(q), kind_(kind), theta_(theta), sigma2_(sigma2) {
  if (q < 1) throw std::invalid_argument("q must be >= 1, got " + std::to_string(q));
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive, got " + std::to_string(sigma2));
  }
  if (kind == PriorKind::IOUP && !(theta < 0.0)) {
    throw std::invalid_argument("IOUP requires theta < 0, got " + std::to_string(theta));
  }
}

StateSpacePrior StateSpacePrior::iwp(int q, double sigma2) {
  return {q, PriorKind::IWP, 0.0, sigma2};
}

StateSpacePrior StateSpacePrior::ioup(int q, double theta, double sigma2) {
  return {q, PriorKind::IOUP, theta, sigma2};
}

DriftDiffusion drift_and_diffusion(const StateSpacePrior& prior) {
  const int n = prior.dim();
  DriftDiffusion out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (int i = 0; i + 1 < n; ++i) out.F(i, i + 1) = 1.0;
  if (prior.kind() == PriorKind::IOUP) out.F(n - 1, n - 1) = prior.theta();
  out.L(n - 1) = std::sqrt(prior.sigma2());
  return out;
}

TransitionPair iwp_transition(int q, double h, double sigma2) {
  check_common(q, h, sigma2);
  const int n = q + 1;
  TransitionPair tp{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), h};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      tp.A(i, j) = static_cast<double>(std::pow(static_cast<long double>(h), j - i) / factorial(j - i));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int p = 2 * q + 1 - i - j;
      tp.Q(i, j) = static_cast<double>(sigma2 * std::pow(static_cast<long double>(h), p) /
                                       (p * factorial(q - i) * factorial(q - j)));
    }
  }
  return tp;
}

TransitionPair ioup_transition(int q, double h, double theta, double sigma2) {
  check_common(q, h, sigma2);
  if (!(theta < 0.0)) {
    throw std::invalid_argument("IOUP requires theta < 0, got " + std::to_string(theta));
  }
  const int n = q + 1;
  const long double th = theta;
  const long double hl = h;
  const bool small = std::fabs(th * hl) < 1.0L;

  TransitionPair tp{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), h};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < q; ++j) {
      tp.A(i, j) = static_cast<double>(std::pow(hl, j - i) / factorial(j - i));
    }
    tp.A(i, q) = static_cast<double>(exp_remainder(q - i, th, hl));
  }
  tp.A(q, q) = std::exp(theta * h);

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int ma = q - i;
      const int mb = q - j;
      const long double v =
          small ? ioup_q_series(ma, mb, th, hl) : ioup_q_closed(q, ma, mb, th, hl);
      tp.Q(i, j) = static_cast<double>(sigma2 * v);
      tp.Q(j, i) = tp.Q(i, j);
    }
  }
  return tp;
}

TransitionPair transition(const StateSpacePrior& prior, double h) {
  if (prior.kind() == PriorKind::IWP) return iwp_transition(prior.q(), h, prior.sigma2());
  return ioup_transition(prior.q(), h, prior.theta(), prior.sigma2());
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("expm: matrix must be square");
  const Eigen::Index n = M.rows();
  const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd X = M / std::ldexp(1.0, squarings);

  constexpr int kOrder = 13;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd E = I;
  for (int k = kOrder; k >= 1; --k) {
    E = I + X * E / static_cast<double>(k);
  }
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

TransitionPair mfd_transition_oracle(const Eigen::MatrixXd& F, const Eigen::VectorXd& L, double h,
                                     int n_quad) {
  if (F.rows() != F.cols()) throw std::invalid_argument("oracle: F must be square");
  if (L.size() != F.rows()) throw std::invalid_argument("oracle: L must match F");
  if (!(h > 0.0)) throw std::invalid_argument("oracle: h must be positive");
  if (n_quad < 16) throw std::invalid_argument("oracle: n_quad must be >= 16");

  const auto& rule = gauss_legendre16();
  const int panels = n_quad / 16;
  const double width = h / panels;
  const Eigen::Index n = F.rows();

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width;
    for (int k = 0; k < 16; ++k) {
      const double s = mid + 0.5 * width * rule.nodes[k];
      const Eigen::VectorXd g = expm(F * s) * L;
      Q += (0.5 * width * rule.weights[k]) * (g * g.transpose());
    }
  }
  return {expm(F * h), 0.5 * (Q + Q.transpose()), h};
}

}  // namespace odefilter
