#pragma once

// Joint ordinary-least-squares estimate of arm means and environment
// shifts from sufficient statistics. The reward model is
//   r = mu_i + s_j + eps,   s_1 = 0 (identifiability convention),
// so the normal equations have the Gram matrix
//   [ diag(N_i)   n_ij ]          (arm block K x K, cross block K x (J-1),
//   [ n_ji   diag(m_j) ]           environment block (J-1) x (J-1), j >= 2)
// with right-hand side (arm totals; environment totals for j >= 2).
//
// Both diagonal blocks let the system be solved exactly by eliminating the
// environment block: with S = diag(N_i) - C diag(1/m_j) C' (the K x K
// Schur complement),
//   mu_hat = S^{-1} (b_arm - C diag(1/m_j) b_env),
//   s_hat  = diag(1/m_j) (b_env - C' mu_hat),
// and the arm block of (X'X)^{-1} is S^{-1}. Tests cross-check this path
// against a dense factorization of the full Gram matrix and against the
// hat-matrix form computed from an explicit observation log.

#include <Eigen/Dense>
#include <optional>

#include "shiftbai/stats.hpp"

namespace shiftbai {

struct OlsFit {
  Eigen::VectorXd mu_hat;        // length K
  Eigen::VectorXd s_hat;         // length J-1 (shifts of environments 2..J)
  Eigen::MatrixXd arm_cov_unit;  // K x K arm block of (X'X)^{-1}
  // Full (K+J-1)^2 inverse Gram; empty unless requested at fit time.
  Eigen::MatrixXd theta_cov_unit;
  std::optional<double> sigma2_hat;
  double rss = 0.0;  // residual sum of squares
  long dof = 0;      // N - (K + J - 1)

  bool has_full_cov() const { return theta_cov_unit.size() > 0; }
};

// Fits the joint model. Preconditions: is_connected(stats). When
// known_sigma2 is supplied it takes the place of the residual-based
// estimate in sigma2_hat; otherwise sigma2_hat is the unbiased estimator
// RSS / dof, present iff dof >= 1. Throws disconnected_design_error or
// singular_gram_error.
OlsFit fit_ols(const SufficientStats& stats,
               std::optional<double> known_sigma2 = std::nullopt,
               bool with_full_covariance = true);

// sigma2 times the arm block of the unit covariance: Cov[mu_hat].
Eigen::MatrixXd mean_covariance(const OlsFit& fit, double sigma2);

// Upper confidence bound mu_hat_i + sqrt(16 ln(t) / N_i) * sqrt(cov_ii),
// where cov is Cov[mu_hat] (sigma^2 already applied).
double ucb(const OlsFit& fit, const Eigen::MatrixXd& cov, int arm, long t,
           const std::vector<long>& per_arm_counts);

}  // namespace shiftbai
