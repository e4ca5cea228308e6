#include "shiftbai/diagnostics.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <functional>
#include <thread>

#include "shiftbai/errors.hpp"
#include "shiftbai/ols.hpp"
#include "shiftbai/rng.hpp"

namespace shiftbai {

namespace {

void parallel_reps(long replications, unsigned threads, const std::function<void(long)>& body) {
  unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<long>(1, replications)));
  if (n <= 1) {
    for (long r = 0; r < replications; ++r) body(r);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long r = next.fetch_add(1);
      if (r >= replications) return;
      body(r);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

SufficientStats stats_from_design(const std::vector<std::vector<long>>& counts,
                                  const std::vector<double>& mu, const std::vector<double>& s,
                                  double sigma, Rng* noise) {
  const int K = static_cast<int>(counts.size());
  if (K < 1) throw config_error("design has no arms");
  const int J = static_cast<int>(counts.front().size());
  SufficientStats stats(K);
  for (int j = 1; j <= J; ++j) {
    for (int i = 0; i < K; ++i) {
      const long n = counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
      for (long k = 0; k < n; ++k) {
        double r = mu[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j - 1)];
        if (noise) r += sigma * noise->normal();
        stats.record(j, i, r);
      }
    }
  }
  return stats;
}

}  // namespace

MomentReport estimator_moments(const std::vector<std::vector<long>>& counts,
                               const std::vector<double>& mu, const std::vector<double>& s,
                               double sigma, long replications, std::uint64_t seed,
                               unsigned threads) {
  const int K = static_cast<int>(counts.size());
  const int J = static_cast<int>(counts.front().size());
  if (static_cast<int>(mu.size()) != K || static_cast<int>(s.size()) != J)
    throw config_error("design, mu and s dimensions disagree");
  const int d = K + J - 1;

  // Analytic covariance from the fixed Gram (rewards are irrelevant to it).
  Rng probe_rng(derive_seed(seed, "moments-gram"));
  const SufficientStats gram_stats = stats_from_design(counts, mu, s, sigma, &probe_rng);
  const OlsFit cov_fit = fit_ols(gram_stats, std::nullopt, true);
  const long dof = cov_fit.dof;

  MomentReport report;
  report.replications = replications;
  report.seed = seed;
  report.analytic_cov = sigma * sigma * cov_fit.theta_cov_unit;
  report.truth.resize(d);
  for (int i = 0; i < K; ++i) {
    report.param_names.push_back("mu_" + std::to_string(i + 1));
    report.truth(i) = mu[static_cast<std::size_t>(i)];
  }
  for (int j = 2; j <= J; ++j) {
    report.param_names.push_back("s_" + std::to_string(j));
    report.truth(K + j - 2) = s[static_cast<std::size_t>(j - 1)] - s[0];
  }

  Eigen::MatrixXd samples(replications, d);
  std::vector<double> sigma2_samples(static_cast<std::size_t>(replications), 0.0);
  parallel_reps(replications, threads, [&](long r) {
    Rng noise(derive_seed(seed, "moments", static_cast<std::uint64_t>(r)));
    const SufficientStats stats = stats_from_design(counts, mu, s, sigma, &noise);
    const OlsFit fit = fit_ols(stats, std::nullopt, false);
    samples.row(r).head(K) = fit.mu_hat.transpose();
    if (J > 1) samples.row(r).tail(J - 1) = fit.s_hat.transpose();
    sigma2_samples[static_cast<std::size_t>(r)] = fit.sigma2_hat.value_or(0.0);
  });

  report.mc_mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - report.mc_mean.transpose();
  report.mc_cov = centered.transpose() * centered / static_cast<double>(replications - 1);

  double max_rel = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const double denom = std::abs(report.analytic_cov(a, b));
      if (denom > 0.0)
        max_rel = std::max(max_rel, std::abs(report.mc_cov(a, b) - report.analytic_cov(a, b)) / denom);
    }
  report.max_rel_cov_err = max_rel;

  double max_bias = 0.0;
  for (int a = 0; a < d; ++a) {
    const double se = std::sqrt(report.analytic_cov(a, a) / static_cast<double>(replications));
    max_bias = std::max(max_bias, std::abs(report.mc_mean(a) - report.truth(a)) / se);
  }
  report.max_bias_in_se = max_bias;

  double s2_mean = 0.0;
  for (double v : sigma2_samples) s2_mean += v;
  s2_mean /= static_cast<double>(replications);
  report.sigma2_mc_mean = s2_mean;
  report.sigma2_truth = sigma * sigma;
  // sigma2_hat * dof / sigma^2 is chi-squared with `dof` degrees of freedom.
  const double s2_se = std::sqrt(2.0 * sigma * sigma * sigma * sigma / static_cast<double>(dof) /
                                 static_cast<double>(replications));
  report.sigma2_bias_in_se = std::abs(s2_mean - report.sigma2_truth) / s2_se;
  return report;
}

ConsistencyReport consistency_probe(const ConsistencyProbeConfig& config, unsigned threads) {
  const int K = 2;
  BanditInstance inst;
  inst.arm_means = {0.0, config.delta};
  inst.noise_sd = config.sigma;
  inst.shift = config.shift;
  inst.changepoints = ChangePointSpec::uniform(config.cp_min, config.cp_max);

  const std::size_t G = config.n_grid.size();
  const long R = config.replications;
  Eigen::MatrixXd mu1(R, static_cast<Eigen::Index>(G));
  Eigen::MatrixXd diff(R, static_cast<Eigen::Index>(G));

  parallel_reps(R, threads, [&](long r) {
    ObservationStream stream(inst, derive_seed(config.seed, "consistency",
                                               static_cast<std::uint64_t>(r)));
    SufficientStats stats(K);
    std::size_t g = 0;
    const long horizon = config.n_grid.back();
    for (long t = 1; t <= horizon; ++t) {
      const int arm = static_cast<int>((t - 1) % K);
      const int j = stream.env_of(t);
      stats.record(j, arm, stream.observe(arm, t));
      if (g < G && config.n_grid[g] == t) {
        const OlsFit fit = fit_ols(stats, std::nullopt, false);
        mu1(r, static_cast<Eigen::Index>(g)) = fit.mu_hat(0);
        diff(r, static_cast<Eigen::Index>(g)) = fit.mu_hat(0) - fit.mu_hat(1);
        ++g;
      }
    }
  });

  ConsistencyReport report;
  report.n_grid = config.n_grid;
  report.replications = R;
  report.seed = config.seed;
  auto column_var = [R](const Eigen::MatrixXd& m, Eigen::Index c) {
    const double mean = m.col(c).mean();
    return (m.col(c).array() - mean).square().sum() / static_cast<double>(R - 1);
  };
  for (std::size_t g = 0; g < G; ++g) {
    report.var_mu1.push_back(column_var(mu1, static_cast<Eigen::Index>(g)));
    report.var_mu_diff.push_back(column_var(diff, static_cast<Eigen::Index>(g)));
  }
  return report;
}

ConjectureReport covariance_conjecture_probe(const ConjectureProbeConfig& config,
                                             unsigned threads) {
  const int K = config.K;
  const int J = config.J;
  // Fixed design: round-robin across environments of equal length.
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(K),
                                        std::vector<long>(static_cast<std::size_t>(J), 0));
  long t = 0;
  for (int j = 1; j <= J; ++j)
    for (long k = 0; k < config.env_length; ++k, ++t)
      ++counts[static_cast<std::size_t>(t % K)][static_cast<std::size_t>(j - 1)];

  long env1_total = 0;
  for (int i = 0; i < K; ++i) env1_total += counts[static_cast<std::size_t>(i)][0];

  const std::vector<double> mu(static_cast<std::size_t>(K), 0.0);
  const std::vector<double> s(static_cast<std::size_t>(J), 0.0);

  Rng gram_rng(derive_seed(config.seed, "conjecture-gram"));
  const SufficientStats gram_stats = stats_from_design(counts, mu, s, config.sigma, &gram_rng);
  const OlsFit cov_fit = fit_ols(gram_stats, std::nullopt, true);

  const int E = J - 1;
  const long R = config.replications;
  Eigen::MatrixXd shat(R, E);
  parallel_reps(R, threads, [&](long r) {
    Rng noise(derive_seed(config.seed, "conjecture", static_cast<std::uint64_t>(r)));
    const SufficientStats stats = stats_from_design(counts, mu, s, config.sigma, &noise);
    const OlsFit fit = fit_ols(stats, std::nullopt, false);
    shat.row(r) = fit.s_hat.transpose();
  });

  ConjectureReport report;
  report.replications = R;
  report.seed = config.seed;
  report.conjecture_value = 1.0 / static_cast<double>(env1_total);
  if (E < 2) return report;  // single shift estimator, no off-diagonal entries

  const Eigen::RowVectorXd mean = shat.colwise().mean();
  Eigen::MatrixXd centered = shat.rowwise() - mean;
  Eigen::MatrixXd mc_cov = centered.transpose() * centered / static_cast<double>(R - 1);
  const double s2 = config.sigma * config.sigma;
  for (int a = 0; a < E; ++a)
    for (int b = a + 1; b < E; ++b)
      report.pairs.push_back({a + 2, b + 2, mc_cov(a, b),
                              s2 * cov_fit.theta_cov_unit(K + a, K + b)});
  return report;
}

double bias_decomposition(const SufficientStats& stats, const std::vector<double>& shifts,
                          int arm_a, int arm_b) {
  const int J = stats.num_envs();
  if (static_cast<int>(shifts.size()) < J)
    throw std::invalid_argument("need a realized shift for every environment");
  const auto na = static_cast<double>(stats.arm_count(arm_a));
  const auto nb = static_cast<double>(stats.arm_count(arm_b));
  if (na < 1 || nb < 1) throw std::invalid_argument("both arms need at least one sample");
  double bias = 0.0;
  for (int j = 1; j <= J; ++j)
    bias += shifts[static_cast<std::size_t>(j - 1)] *
            (static_cast<double>(stats.count(arm_a, j)) / na -
             static_cast<double>(stats.count(arm_b, j)) / nb);
  return bias;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_moment_csv(const MomentReport& report, const std::string& path) {
  auto out = open_csv(path);
  out << "seed,replications,record,i,j,value,reference\n";
  const auto d = report.mc_mean.size();
  for (Eigen::Index a = 0; a < d; ++a)
    out << report.seed << ',' << report.replications << ",mean,"
        << report.param_names[static_cast<std::size_t>(a)] << ",," << fmt(report.mc_mean(a))
        << ',' << fmt(report.truth(a)) << '\n';
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      out << report.seed << ',' << report.replications << ",cov,"
          << report.param_names[static_cast<std::size_t>(a)] << ','
          << report.param_names[static_cast<std::size_t>(b)] << ','
          << fmt(report.mc_cov(a, b)) << ',' << fmt(report.analytic_cov(a, b)) << '\n';
  out << report.seed << ',' << report.replications << ",sigma2,,," << fmt(report.sigma2_mc_mean)
      << ',' << fmt(report.sigma2_truth) << '\n';
}

void write_consistency_csv(const ConsistencyReport& report, const std::string& path) {
  auto out = open_csv(path);
  out << "seed,replications,n,var_mu1,var_mu_diff\n";
  for (std::size_t g = 0; g < report.n_grid.size(); ++g)
    out << report.seed << ',' << report.replications << ',' << report.n_grid[g] << ','
        << fmt(report.var_mu1[g]) << ',' << fmt(report.var_mu_diff[g]) << '\n';
}

void write_conjecture_csv(const ConjectureReport& report, const std::string& path) {
  auto out = open_csv(path);
  out << "seed,replications,j,m,mc_cov,analytic_cov,conjecture\n";
  for (const auto& p : report.pairs)
    out << report.seed << ',' << report.replications << ',' << p.j << ',' << p.m << ','
        << fmt(p.mc_cov) << ',' << fmt(p.analytic_cov) << ',' << fmt(report.conjecture_value)
        << '\n';
}

}  // namespace shiftbai
