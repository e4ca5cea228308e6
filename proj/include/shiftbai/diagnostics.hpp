#pragma once

// Empirical verification of the estimator's statistical claims: moments of
// the joint fit on a fixed design, the (in)consistency behaviour of mean
// estimators versus their differences, the conjectured limit of shift
// estimator covariances, and the sample-mean bias decomposition. Every
// probe is a pure function of (config, seed).

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "shiftbai/env.hpp"
#include "shiftbai/stats.hpp"

namespace shiftbai {

struct MomentReport {
  std::vector<std::string> param_names;  // mu_1..mu_K, s_2..s_J
  Eigen::VectorXd truth;
  Eigen::VectorXd mc_mean;
  Eigen::MatrixXd mc_cov;
  Eigen::MatrixXd analytic_cov;  // sigma^2 (X'X)^{-1}
  double max_rel_cov_err = 0.0;  // entrywise |mc-analytic|/|analytic|
  double max_bias_in_se = 0.0;   // max |mc_mean - truth| / SE(mean)
  double sigma2_mc_mean = 0.0;
  double sigma2_truth = 0.0;
  double sigma2_bias_in_se = 0.0;
  long replications = 0;
  std::uint64_t seed = 0;
};

// Redraws noise `replications` times on the fixed allocation plan
// (counts[i][j] = samples of arm i in environment j), fits, and compares
// Monte Carlo moments of (mu_hat, s_hat) with the analytic values.
MomentReport estimator_moments(const std::vector<std::vector<long>>& counts,
                               const std::vector<double>& mu, const std::vector<double>& s,
                               double sigma, long replications, std::uint64_t seed,
                               unsigned threads = 0);

struct ConsistencyProbeConfig {
  double delta = 0.5;
  double sigma = 1.0;
  ShiftSpec shift = ShiftSpec::uniform(0.0, 20.0);
  long cp_min = 2;
  long cp_max = 10;
  std::vector<long> n_grid = {500, 1000, 2000, 4000};
  long replications = 10000;
  std::uint64_t seed = 0;
};

struct ConsistencyReport {
  std::vector<long> n_grid;
  std::vector<double> var_mu1;       // Var(mu_hat_1) at each N
  std::vector<double> var_mu_diff;   // Var(mu_hat_1 - mu_hat_2) at each N
  long replications = 0;
  std::uint64_t seed = 0;
};

// Two-armed round-robin probe; shifts and change points resampled per
// replication.
ConsistencyReport consistency_probe(const ConsistencyProbeConfig& config, unsigned threads = 0);

struct ConjectureProbeConfig {
  int K = 5;
  long env_length = 10;  // round-robin within each environment
  int J = 40;
  double sigma = 1.0;
  long replications = 10000;
  std::uint64_t seed = 0;
};

struct ConjecturePair {
  int j;
  int m;
  double mc_cov;
  double analytic_cov;
};

struct ConjectureReport {
  double conjecture_value = 0.0;  // 1 / sum_i n_i1
  std::vector<ConjecturePair> pairs;
  long replications = 0;
  std::uint64_t seed = 0;
};

// Off-diagonal covariances of shift estimators on a fixed design against
// the conjectured constant. Reported as evidence, never asserted.
ConjectureReport covariance_conjecture_probe(const ConjectureProbeConfig& config,
                                             unsigned threads = 0);

// Shift-bias term of r-bar_a - r-bar_b:
//   sum_j s_j (n_aj / N_a - n_bj / N_b).
// On noiseless data this equals (r-bar_a - r-bar_b) - (mu_a - mu_b) exactly.
double bias_decomposition(const SufficientStats& stats, const std::vector<double>& shifts,
                          int arm_a, int arm_b);

void write_moment_csv(const MomentReport& report, const std::string& path);
void write_consistency_csv(const ConsistencyReport& report, const std::string& path);
void write_conjecture_csv(const ConjectureReport& report, const std::string& path);

}  // namespace shiftbai
