#include "shiftbai/ols_separated.hpp"

#include <algorithm>
#include <stdexcept>

#include "shiftbai/errors.hpp"
#include "shiftbai/stats.hpp"

namespace shiftbai {

namespace {

struct DesignMatrices {
  Eigen::MatrixXd A;  // N x K arm indicators
  Eigen::MatrixXd B;  // N x (J-1) environment indicators (j >= 2)
  Eigen::VectorXd r;
};

DesignMatrices build_design(const std::vector<TraceEntry>& log, int num_arms) {
  int max_env = 0;
  for (const auto& e : log) max_env = std::max(max_env, e.env);
  // Validate connectivity through the same stats structure used elsewhere.
  {
    SufficientStats check(num_arms);
    std::vector<TraceEntry> sorted = log;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TraceEntry& a, const TraceEntry& b) { return a.env < b.env; });
    for (const auto& e : sorted) check.record(e.env, e.arm, e.reward);
    if (!check.is_connected())
      throw disconnected_design_error(
          "arm co-observation graph is not connected; the joint fit is unidentifiable");
  }

  const auto n = static_cast<Eigen::Index>(log.size());
  DesignMatrices d;
  d.A = Eigen::MatrixXd::Zero(n, num_arms);
  d.B = Eigen::MatrixXd::Zero(n, std::max(0, max_env - 1));
  d.r.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& e = log[static_cast<std::size_t>(k)];
    if (e.arm < 0 || e.arm >= num_arms) throw std::invalid_argument("arm index out of range");
    if (e.env < 1) throw std::invalid_argument("environment ordinal must be >= 1");
    d.A(k, e.arm) = 1.0;
    if (e.env >= 2) d.B(k, e.env - 2) = 1.0;
    d.r(k) = e.reward;
  }
  return d;
}

Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& M) {
  const auto n = M.rows();
  if (M.cols() == 0) return Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd gram = M.transpose() * M;
  return M * gram.ldlt().solve(M.transpose());
}

}  // namespace

SeparatedFit fit_ols_separated(const std::vector<TraceEntry>& log, int num_arms) {
  auto d = build_design(log, num_arms);
  const auto n = d.A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd HB = hat_matrix(d.B);
  const Eigen::MatrixXd HA = hat_matrix(d.A);

  SeparatedFit fit;
  {
    Eigen::MatrixXd lhs = d.A.transpose() * (I - HB) * d.A;
    Eigen::VectorXd rhs = d.A.transpose() * (I - HB) * d.r;
    fit.mu_hat = lhs.ldlt().solve(rhs);
  }
  if (d.B.cols() > 0) {
    Eigen::MatrixXd lhs = d.B.transpose() * (I - HA) * d.B;
    Eigen::VectorXd rhs = d.B.transpose() * (I - HA) * d.r;
    fit.s_hat = lhs.ldlt().solve(rhs);
  } else {
    fit.s_hat.resize(0);
  }
  return fit;
}

Eigen::MatrixXd mean_covariance_hat_form(const std::vector<TraceEntry>& log, int num_arms,
                                         double sigma2) {
  auto d = build_design(log, num_arms);
  const auto n = d.A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd HB = hat_matrix(d.B);
  const Eigen::MatrixXd HA = hat_matrix(d.A);
  Eigen::MatrixXd inner = d.A.transpose() * (I - 2.0 * HB + HB * HA * HB) * d.A;
  return sigma2 * inner.ldlt().solve(Eigen::MatrixXd::Identity(num_arms, num_arms));
}

Eigen::MatrixXd shift_covariance_hat_form(const std::vector<TraceEntry>& log, int num_arms,
                                          double sigma2) {
  auto d = build_design(log, num_arms);
  const auto n = d.A.rows();
  const auto e = d.B.cols();
  if (e == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd HB = hat_matrix(d.B);
  const Eigen::MatrixXd HA = hat_matrix(d.A);
  Eigen::MatrixXd inner = d.B.transpose() * (I - 2.0 * HA + HA * HB * HA) * d.B;
  return sigma2 * inner.ldlt().solve(Eigen::MatrixXd::Identity(e, e));
}

}  // namespace shiftbai
