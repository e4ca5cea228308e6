#pragma once

// Separated-form solution computed from an explicit observation log via
// the hat-matrix identities
//   mu_hat = (A'(I - H_B)A)^{-1} A'(I - H_B) r
//   s_hat  = (B'(I - H_A)B)^{-1} B'(I - H_A) r
// with H_A = A(A'A)^{-1}A' and H_B = B(B'B)^{-1}B'. This path builds the
// N x d design explicitly and serves as a cross-check oracle for the
// sufficient-statistics fit; it is O(N^2) and meant for small designs.

#include <Eigen/Dense>
#include <vector>

#include "shiftbai/env.hpp"

namespace shiftbai {

struct SeparatedFit {
  Eigen::VectorXd mu_hat;  // length K
  Eigen::VectorXd s_hat;   // length J-1
};

SeparatedFit fit_ols_separated(const std::vector<TraceEntry>& log, int num_arms);

// Cov[mu_hat] in its hat-matrix form sigma^2 [A'(I-2H_B+H_B H_A H_B)A]^{-1}.
Eigen::MatrixXd mean_covariance_hat_form(const std::vector<TraceEntry>& log, int num_arms,
                                         double sigma2);

// Cov[s_hat] in its hat-matrix form sigma^2 [B'(I-2H_A+H_A H_B H_A)B]^{-1}.
Eigen::MatrixXd shift_covariance_hat_form(const std::vector<TraceEntry>& log, int num_arms,
                                          double sigma2);

}  // namespace shiftbai
