#include "shiftbai/ols.hpp"

#include <cmath>
#include <stdexcept>

#include "shiftbai/errors.hpp"

namespace shiftbai {

OlsFit fit_ols(const SufficientStats& stats, std::optional<double> known_sigma2,
               bool with_full_covariance) {
  const int K = stats.num_arms();
  const int J = stats.num_envs();
  if (J == 0 || !stats.is_connected())
    throw disconnected_design_error(
        "arm co-observation graph is not connected; the joint fit is unidentifiable");

  const int E = J - 1;  // estimated shift parameters
  Eigen::VectorXd b_arm(K);
  for (int i = 0; i < K; ++i) b_arm(i) = stats.arm_total(i);

  Eigen::MatrixXd cross(K, E);        // n_ij for j >= 2
  Eigen::VectorXd env_inv(E);         // 1 / m_j
  Eigen::VectorXd b_env(E);
  for (int e = 0; e < E; ++e) {
    const int j = e + 2;
    const long m = stats.env_count(j);
    env_inv(e) = 1.0 / static_cast<double>(m);
    b_env(e) = stats.env_total(j);
    for (int i = 0; i < K; ++i) cross(i, e) = static_cast<double>(stats.count(i, j));
  }

  // Schur complement of the environment block.
  Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) schur(i, i) = static_cast<double>(stats.arm_count(i));
  if (E > 0) schur.noalias() -= cross * env_inv.asDiagonal() * cross.transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
  const auto& d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || d.minCoeff() <= dmax * 1e-12)
    throw singular_gram_error("Gram matrix factorization failed despite a connected design");

  Eigen::VectorXd rhs = b_arm;
  if (E > 0) rhs.noalias() -= cross * (env_inv.asDiagonal() * b_env);

  OlsFit fit;
  fit.mu_hat = ldlt.solve(rhs);
  if (E > 0)
    fit.s_hat = env_inv.asDiagonal() * (b_env - cross.transpose() * fit.mu_hat);
  else
    fit.s_hat.resize(0);

  fit.arm_cov_unit = ldlt.solve(Eigen::MatrixXd::Identity(K, K));
  fit.arm_cov_unit = ((fit.arm_cov_unit + fit.arm_cov_unit.transpose()) * 0.5).eval();

  if (with_full_covariance) {
    const int dim = K + E;
    Eigen::MatrixXd full(dim, dim);
    full.topLeftCorner(K, K) = fit.arm_cov_unit;
    if (E > 0) {
      Eigen::MatrixXd cde = cross * env_inv.asDiagonal();  // C De^{-1}
      Eigen::MatrixXd tr = -fit.arm_cov_unit * cde;
      full.topRightCorner(K, E) = tr;
      full.bottomLeftCorner(E, K) = tr.transpose();
      Eigen::MatrixXd br = cde.transpose() * fit.arm_cov_unit * cde;
      br.diagonal() += env_inv;
      full.bottomRightCorner(E, E) = (br + br.transpose()) * 0.5;
    }
    fit.theta_cov_unit = std::move(full);
  }

  fit.dof = stats.total_count() - (K + E);
  const double theta_dot_rhs = fit.mu_hat.dot(b_arm) + (E > 0 ? fit.s_hat.dot(b_env) : 0.0);
  fit.rss = std::max(0.0, stats.sq_sum() - theta_dot_rhs);
  if (known_sigma2) {
    fit.sigma2_hat = *known_sigma2;
  } else if (fit.dof >= 1) {
    fit.sigma2_hat = fit.rss / static_cast<double>(fit.dof);
  }
  return fit;
}

Eigen::MatrixXd mean_covariance(const OlsFit& fit, double sigma2) {
  return sigma2 * fit.arm_cov_unit;
}

double ucb(const OlsFit& fit, const Eigen::MatrixXd& cov, int arm, long t,
           const std::vector<long>& per_arm_counts) {
  if (t < 1) throw std::invalid_argument("time step must be >= 1");
  const long n = per_arm_counts.at(static_cast<std::size_t>(arm));
  if (n < 1) throw std::invalid_argument("arm has no samples");
  const double rate = std::sqrt(16.0 * std::log(static_cast<double>(t)) / static_cast<double>(n));
  return fit.mu_hat(arm) + rate * std::sqrt(std::max(0.0, cov(arm, arm)));
}

}  // namespace shiftbai
