#include <doctest.h>

#include <cmath>

#include "shiftbai/diagnostics.hpp"
#include "shiftbai/rng.hpp"

using namespace shiftbai;

TEST_CASE("bias term vanishes under equal allocation fractions") {
  SufficientStats st(2);
  st.record(1, 0, 1.0);
  st.record(1, 1, 0.0);
  st.record(2, 0, 11.0);
  st.record(2, 1, 10.0);
  CHECK(bias_decomposition(st, {0.0, 10.0}, 0, 1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-environment imbalance produces the ranking-flipping bias term") {
  // Equal counts in environment 1, the inferior arm oversampled under a big
  // second shift.
  SufficientStats st(2);
  const double mu0 = 0.0, mu1 = 0.4, s2 = 50.0;
  st.record(1, 0, mu0);
  st.record(1, 1, mu1);
  st.record(2, 0, mu0 + s2);
  st.record(2, 0, mu0 + s2);
  st.record(2, 0, mu0 + s2);
  st.record(2, 1, mu1 + s2);
  const double term = bias_decomposition(st, {0.0, s2}, 0, 1);
  CHECK(term > 0.0);
  const double mean_diff = st.arm_mean(0) - st.arm_mean(1);
  CHECK(mean_diff - (mu0 - mu1) == doctest::Approx(term).epsilon(1e-12));
  CHECK(mean_diff > 0.0);  // noiseless ranking flipped by the shift exposure
}

TEST_CASE("noiseless decomposition identity holds for arbitrary count patterns") {
  Rng rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = 2 + static_cast<int>(rng.bounded(3));
    const int J = 1 + static_cast<int>(rng.bounded(4));
    std::vector<double> mu(static_cast<std::size_t>(K)), s(static_cast<std::size_t>(J));
    for (auto& v : mu) v = rng.uniform(-1.0, 1.0);
    for (auto& v : s) v = rng.uniform(0.0, 20.0);
    SufficientStats st(K);
    for (int j = 1; j <= J; ++j)
      for (int i = 0; i < K; ++i) {
        const long n = 1 + static_cast<long>(rng.bounded(4));
        for (long k = 0; k < n; ++k)
          st.record(j, i, mu[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j - 1)]);
      }
    const double term = bias_decomposition(st, s, 0, 1);
    const double resid = (st.arm_mean(0) - st.arm_mean(1)) -
                         (mu[0] - mu[1]) - term;
    CHECK(std::abs(resid) < 1e-12);
  }
}

TEST_CASE("estimator moments match analytic values on a balanced design") {
  const std::vector<std::vector<long>> counts = {{5, 5}, {5, 5}};
  auto report = estimator_moments(counts, {0.0, 0.5}, {0.0, 10.0}, 1.0, 30000, 515151, 2);
  CHECK(report.max_bias_in_se < 4.0);
  CHECK(report.max_rel_cov_err < 0.05);
  CHECK(report.sigma2_bias_in_se < 4.0);
  // Unit covariance of the balanced design: diag-ish with known entries.
  CHECK(report.analytic_cov(0, 0) == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(report.analytic_cov(0, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(report.analytic_cov(2, 2) == doctest::Approx(0.2).epsilon(1e-9));

  // Doubling sigma scales the analytic covariance by exactly four.
  auto scaled = estimator_moments(counts, {0.0, 0.5}, {0.0, 10.0}, 2.0, 100, 515151, 1);
  CHECK((scaled.analytic_cov - 4.0 * report.analytic_cov).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("consistency probe in the stationary case shows vanishing variance") {
  ConsistencyProbeConfig cfg;
  cfg.shift = ShiftSpec::zero();
  cfg.n_grid = {200, 800};
  cfg.replications = 2000;
  cfg.seed = 99;
  auto report = consistency_probe(cfg, 2);
  // Round-robin: N_1 = N/2, so Var(mu_hat_1) ~ sigma^2 / (N/2).
  CHECK(report.var_mu1[0] == doctest::Approx(1.0 / 100.0).epsilon(0.2));
  CHECK(report.var_mu1[1] == doctest::Approx(1.0 / 400.0).epsilon(0.2));
  CHECK(report.var_mu1[1] < report.var_mu1[0]);
  CHECK(report.var_mu_diff[1] < report.var_mu_diff[0]);
}

TEST_CASE("conjecture probe: degenerate J=2 has no off-diagonal entries") {
  ConjectureProbeConfig cfg;
  cfg.K = 3;
  cfg.env_length = 6;
  cfg.J = 2;
  cfg.replications = 50;
  cfg.seed = 1;
  auto report = covariance_conjecture_probe(cfg, 1);
  CHECK(report.pairs.empty());
  CHECK(report.conjecture_value == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("conjecture probe: Monte Carlo matches the analytic shift covariance") {
  ConjectureProbeConfig cfg;
  cfg.K = 3;
  cfg.env_length = 6;
  cfg.J = 5;
  cfg.replications = 40000;
  cfg.seed = 2024;
  auto report = covariance_conjecture_probe(cfg, 2);
  REQUIRE_FALSE(report.pairs.empty());
  for (const auto& p : report.pairs)
    CHECK(std::abs(p.mc_cov - p.analytic_cov) < 0.05 * std::abs(p.analytic_cov));
}
