#pragma once

// Shared test helpers: an independent brute-force normal-equation oracle
// built from the explicit observation log (no code shared with the
// production solver), random connected design generation, and small
// conveniences.

#include <Eigen/Dense>
#include <vector>

#include "shiftbai/env.hpp"
#include "shiftbai/rng.hpp"
#include "shiftbai/stats.hpp"

namespace testutil {

struct DenseRef {
  Eigen::VectorXd mu;
  Eigen::VectorXd s;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd gram_inv;
  double sigma2 = 0.0;
  long dof = 0;
};

// Builds X row by row from the log (arm indicators then environment
// indicators for j >= 2), accumulates X'X and X'r, and solves with a fully
// pivoted LU.
inline DenseRef dense_reference_fit(const std::vector<shiftbai::TraceEntry>& log, int K) {
  int J = 1;
  for (const auto& e : log) J = std::max(J, e.env);
  const int d = K + J - 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xtr = Eigen::VectorXd::Zero(d);
  double rtr = 0.0;
  for (const auto& e : log) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    x(e.arm) = 1.0;
    if (e.env >= 2) x(K + e.env - 2) = 1.0;
    gram += x * x.transpose();
    xtr += e.reward * x;
    rtr += e.reward * e.reward;
  }
  DenseRef ref;
  ref.gram = gram;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  ref.gram_inv = lu.inverse();
  Eigen::VectorXd theta = lu.solve(xtr);
  ref.mu = theta.head(K);
  ref.s = theta.tail(J - 1);
  ref.dof = static_cast<long>(log.size()) - d;
  double rss = rtr - 2.0 * theta.dot(xtr) + theta.dot(gram * theta);
  ref.sigma2 = ref.dof >= 1 ? std::max(0.0, rss) / static_cast<double>(ref.dof) : 0.0;
  return ref;
}

struct RandomDesign {
  std::vector<shiftbai::TraceEntry> log;  // environment-ordered
  shiftbai::SufficientStats stats;
  int K;
  int J;
  std::vector<double> mu;
  std::vector<double> s;  // absolute shifts, s[0] for environment 1
};

// Rejection-samples a connected design with K <= 6, J <= 6, N <= 60 and
// Gaussian-ish rewards. `noiseless` makes every reward exactly mu_i + s_j.
inline RandomDesign random_connected_design(shiftbai::Rng& rng, bool noiseless = false) {
  for (;;) {
    const int K = 2 + static_cast<int>(rng.bounded(5));
    const int J = 1 + static_cast<int>(rng.bounded(6));
    std::vector<double> mu(static_cast<std::size_t>(K));
    std::vector<double> s(static_cast<std::size_t>(J));
    for (auto& v : mu) v = rng.uniform(-2.0, 2.0);
    for (auto& v : s) v = rng.uniform(0.0, 20.0);
    shiftbai::SufficientStats stats(K);
    std::vector<shiftbai::TraceEntry> log;
    long t = 0;
    for (int j = 1; j <= J; ++j) {
      bool any = false;
      for (int i = 0; i < K; ++i) {
        if (rng.uniform() < 0.45 && log.size() < 58) {
          const long n = 1 + static_cast<long>(rng.bounded(2));
          for (long k = 0; k < n && log.size() < 60; ++k) {
            double r = mu[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j - 1)];
            if (!noiseless) r += rng.normal();
            ++t;
            log.push_back({t, j, i, r});
            stats.record(j, i, r);
            any = true;
          }
        }
      }
      if (!any) {  // every environment needs at least one observation
        const int i = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(K)));
        double r = mu[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j - 1)];
        if (!noiseless) r += rng.normal();
        ++t;
        log.push_back({t, j, i, r});
        stats.record(j, i, r);
      }
    }
    if (stats.is_connected())
      return RandomDesign{std::move(log), std::move(stats), K, J, std::move(mu), std::move(s)};
  }
}

}  // namespace testutil
