#include <doctest.h>

#include <cmath>

#include "shiftbai/errors.hpp"
#include "shiftbai/ols.hpp"
#include "shiftbai/ols_separated.hpp"
#include "shiftbai/rng.hpp"
#include "test_util.hpp"

using namespace shiftbai;

namespace {

SufficientStats stats_from_log(const std::vector<TraceEntry>& log, int K) {
  SufficientStats st(K);
  for (const auto& e : log) st.record(e.env, e.arm, e.reward);
  return st;
}

}  // namespace

TEST_CASE("exactly consistent system is reproduced with zero residuals") {
  const std::vector<TraceEntry> log = {
      {1, 1, 0, 0.0}, {2, 1, 1, 1.0}, {3, 2, 0, 2.0}, {4, 2, 1, 3.0}};
  auto st = stats_from_log(log, 2);
  const OlsFit fit = fit_ols(st);
  CHECK(fit.mu_hat(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.mu_hat(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.s_hat(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("inconsistent system matches the brute-force normal equations") {
  const std::vector<TraceEntry> log = {
      {1, 1, 0, 0.0}, {2, 1, 0, 2.0}, {3, 1, 1, 1.0}, {4, 2, 0, 4.0}, {5, 2, 1, 5.0}};
  auto st = stats_from_log(log, 2);
  const OlsFit fit = fit_ols(st);

  CHECK(fit.mu_hat(0) == doctest::Approx(6.0 / 7.0).epsilon(1e-10));
  CHECK(fit.mu_hat(1) == doctest::Approx(9.0 / 7.0).epsilon(1e-10));
  CHECK(fit.s_hat(0) == doctest::Approx(24.0 / 7.0).epsilon(1e-10));
  CHECK(fit.dof == 2);
  REQUIRE(fit.sigma2_hat.has_value());
  CHECK(*fit.sigma2_hat == doctest::Approx(8.0 / 7.0).epsilon(1e-10));

  const auto ref = testutil::dense_reference_fit(log, 2);
  CHECK((fit.mu_hat - ref.mu).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fit.s_hat - ref.s).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(*fit.sigma2_hat == doctest::Approx(ref.sigma2).epsilon(1e-10));
  CHECK((fit.theta_cov_unit - ref.gram_inv).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("single environment decouples into per-arm sample means") {
  SufficientStats st(3);
  st.record(1, 0, 1.0);
  st.record(1, 0, 3.0);
  st.record(1, 1, -1.0);
  st.record(1, 2, 4.0);
  const OlsFit fit = fit_ols(st);
  CHECK(fit.mu_hat(0) == doctest::Approx(2.0));
  CHECK(fit.mu_hat(1) == doctest::Approx(-1.0));
  CHECK(fit.mu_hat(2) == doctest::Approx(4.0));
  CHECK(fit.s_hat.size() == 0);
}

TEST_CASE("fit on a disconnected design is a semantic error") {
  SufficientStats st(4);
  st.record(1, 0, 0.0);
  st.record(1, 1, 0.0);
  st.record(2, 2, 0.0);
  st.record(2, 3, 0.0);
  CHECK_THROWS_AS(fit_ols(st), disconnected_design_error);

  SufficientStats empty(2);
  CHECK_THROWS_AS(fit_ols(empty), disconnected_design_error);
}

TEST_CASE("known sigma2 takes the place of the residual estimate") {
  SufficientStats st(2);
  st.record(1, 0, 1.0);
  st.record(1, 1, 2.0);
  const OlsFit fit = fit_ols(st, 4.0);
  REQUIRE(fit.sigma2_hat.has_value());
  CHECK(*fit.sigma2_hat == doctest::Approx(4.0));
  // Without it, dof = 0 leaves the estimate absent.
  const OlsFit fit2 = fit_ols(st);
  CHECK_FALSE(fit2.sigma2_hat.has_value());
}

TEST_CASE("mean covariance: stationary case is sigma^2 / N_i") {
  SufficientStats st(2);
  for (int k = 0; k < 5; ++k) st.record(1, 0, static_cast<double>(k));
  for (int k = 0; k < 3; ++k) st.record(1, 1, 1.0);
  const OlsFit fit = fit_ols(st);
  const Eigen::MatrixXd cov = mean_covariance(fit, 2.0);
  CHECK(cov(0, 0) == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
  CHECK(cov(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(cov(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mean covariance equals the arm block of the Gram inverse and the hat form") {
  const std::vector<TraceEntry> log = {
      {1, 1, 0, 0.0}, {2, 1, 0, 2.0}, {3, 1, 1, 1.0}, {4, 2, 0, 4.0}, {5, 2, 1, 5.0}};
  auto st = stats_from_log(log, 2);
  const OlsFit fit = fit_ols(st);
  const auto ref = testutil::dense_reference_fit(log, 2);
  const Eigen::MatrixXd cov = mean_covariance(fit, 1.0);
  CHECK((cov - ref.gram_inv.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd hat = mean_covariance_hat_form(log, 2, 1.0);
  CHECK((cov - hat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ucb width at t=1 is zero and scales with sigma^2") {
  SufficientStats st(2);
  st.record(1, 0, 1.0);
  st.record(1, 0, 2.0);
  st.record(1, 1, 0.5);
  const OlsFit fit = fit_ols(st);
  std::vector<long> counts = {st.arm_count(0), st.arm_count(1)};

  const Eigen::MatrixXd cov1 = mean_covariance(fit, 1.0);
  CHECK(ucb(fit, cov1, 0, 1, counts) == doctest::Approx(fit.mu_hat(0)).epsilon(1e-12));

  // Stationary identity: UCB_i = rbar_i + sqrt(16 ln t sigma^2 / N_i^2).
  const long t = 7;
  const double expected =
      fit.mu_hat(0) + std::sqrt(16.0 * std::log(static_cast<double>(t)) * 1.0 / (2.0 * 2.0));
  CHECK(ucb(fit, cov1, 0, t, counts) == doctest::Approx(expected).epsilon(1e-12));

  const Eigen::MatrixXd cov2 = mean_covariance(fit, 2.0);
  const double w1 = ucb(fit, cov1, 0, t, counts) - fit.mu_hat(0);
  const double w2 = ucb(fit, cov2, 0, t, counts) - fit.mu_hat(0);
  CHECK(w2 * w2 == doctest::Approx(2.0 * w1 * w1).epsilon(1e-12));
}

TEST_CASE("per-environment translation moves s_hat, not mu_hat") {
  Rng rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    auto design = testutil::random_connected_design(rng);
    if (design.J < 2) continue;
    const OlsFit base = fit_ols(design.stats);

    const double c = rng.uniform(-10.0, 10.0);
    const int target = 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(design.J - 1)));

    SufficientStats shifted(design.K);
    for (const auto& e : design.log)
      shifted.record(e.env, e.arm, e.env == target ? e.reward + c : e.reward);
    const OlsFit moved = fit_ols(shifted);

    CHECK((moved.mu_hat - base.mu_hat).cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 2; j <= design.J; ++j) {
      const double expect = base.s_hat(j - 2) + (j == target ? c : 0.0);
      CHECK(moved.s_hat(j - 2) == doctest::Approx(expect).epsilon(1e-9));
    }

    // Translating environment 1 moves every mean and counter-moves shifts.
    SufficientStats env1(design.K);
    for (const auto& e : design.log)
      env1.record(e.env, e.arm, e.env == 1 ? e.reward + c : e.reward);
    const OlsFit moved1 = fit_ols(env1);
    CHECK((moved1.mu_hat - (base.mu_hat.array() + c).matrix()).cwiseAbs().maxCoeff() < 1e-9);
    if (design.J >= 2)
      CHECK((moved1.s_hat - (base.s_hat.array() - c).matrix()).cwiseAbs().maxCoeff() < 1e-9);

    int best_base = 0, best_moved = 0;
    base.mu_hat.maxCoeff(&best_base);
    moved1.mu_hat.maxCoeff(&best_moved);
    CHECK(best_base == best_moved);
  }
}

TEST_CASE("a singleton environment leaves every mean estimate unchanged") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    auto design = testutil::random_connected_design(rng);
    const OlsFit base = fit_ols(design.stats);

    const int lone = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(design.K)));
    const long extra = 1 + static_cast<long>(rng.bounded(3));
    for (long k = 0; k < extra; ++k)
      design.stats.record(design.J + 1, lone, rng.uniform(-30.0, 30.0));
    const OlsFit appended = fit_ols(design.stats);
    CHECK((appended.mu_hat - base.mu_hat).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("joint and separated solutions agree; residuals are orthogonal to the design") {
  Rng rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    auto design = testutil::random_connected_design(rng);
    const OlsFit fit = fit_ols(design.stats);
    const SeparatedFit sep = fit_ols_separated(design.log, design.K);

    CHECK((fit.mu_hat - sep.mu_hat).cwiseAbs().maxCoeff() < 1e-9);
    if (design.J >= 2) CHECK((fit.s_hat - sep.s_hat).cwiseAbs().maxCoeff() < 1e-9);

    // X'(r - X theta) = 0 from the explicit log.
    const int d = design.K + design.J - 1;
    Eigen::VectorXd xtres = Eigen::VectorXd::Zero(d);
    for (const auto& e : design.log) {
      double fitted = fit.mu_hat(e.arm);
      if (e.env >= 2) fitted += fit.s_hat(e.env - 2);
      const double res = e.reward - fitted;
      xtres(e.arm) += res;
      if (e.env >= 2) xtres(design.K + e.env - 2) += res;
    }
    CHECK(xtres.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("separated fit with one environment returns sample means") {
  const std::vector<TraceEntry> log = {{1, 1, 0, 2.0}, {2, 1, 0, 4.0}, {3, 1, 1, 1.0}};
  const SeparatedFit sep = fit_ols_separated(log, 2);
  CHECK(sep.mu_hat(0) == doctest::Approx(3.0));
  CHECK(sep.mu_hat(1) == doctest::Approx(1.0));
  CHECK(sep.s_hat.size() == 0);
}
