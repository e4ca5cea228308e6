#include "shiftbai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "shiftbai/errors.hpp"

namespace shiftbai {

std::pair<long, long> scenario_bounds(const ScenarioSpec& scenario, int K) {
  switch (scenario.kind) {
    case Scenario::WorstCase:
      return {2, 2};
    case Scenario::CannotSampleAllArms:
      if (K < 3)
        throw config_error("cannot-sample-all-arms requires K >= 3 (needs cp_max >= cp_min)");
      return {2, K - 1};
    case Scenario::Sample1To10PerArm:
      return {K, 10L * K};
    case Scenario::General:
      return {2, 10L * K};
    case Scenario::Custom:
      if (scenario.cp_min < 2 || scenario.cp_max < scenario.cp_min)
        throw config_error("custom scenario requires 2 <= cp_min <= cp_max");
      return {scenario.cp_min, scenario.cp_max};
  }
  throw config_error("unknown scenario");
}

std::string scenario_string(const ScenarioSpec& scenario) {
  switch (scenario.kind) {
    case Scenario::WorstCase: return "worst-case";
    case Scenario::CannotSampleAllArms: return "cannot-sample-all-arms";
    case Scenario::Sample1To10PerArm: return "sample-1to10-per-arm";
    case Scenario::General: return "general";
    case Scenario::Custom:
      return "custom(" + std::to_string(scenario.cp_min) + "," +
             std::to_string(scenario.cp_max) + ")";
  }
  return "unknown";
}

std::string configuration_string(Configuration c) {
  return c == Configuration::MDM ? "MDM" : "SC";
}

void validate(const ExperimentConfig& config) {
  if (config.K < 2) throw config_error("K must be >= 2");
  if (!(config.sigma > 0.0)) throw config_error("sigma must be > 0");
  if (!(config.delta > 0.0)) throw config_error("delta must be > 0");
  if (config.replications < 1) throw config_error("replications must be >= 1");
  if (config.budgets.empty()) throw config_error("budgets must be non-empty");
  for (std::size_t b = 1; b < config.budgets.size(); ++b)
    if (config.budgets[b] <= config.budgets[b - 1])
      throw config_error("budgets must be strictly ascending");
  if (config.budgets.front() < 1) throw config_error("budgets must be >= 1");
  if (config.policies.empty()) throw config_error("policies must be non-empty");
  scenario_bounds(config.scenario, config.K);  // validates the combination
  for (const auto& p : config.policies) {
    if (p.n0 < 2) throw config_error("policy n0 must be >= 2");
    const bool needs_init =
        p.kind == PolicyKind::LinLucb || p.kind == PolicyKind::ReduceToMab;
    if (needs_init && config.budgets.front() < static_cast<long>(p.n0) * config.K)
      throw config_error("smallest budget is below n0*K for policy '" +
                         policy_kind_string(p) + "'");
  }
}

InstanceConfig instance_config(const ExperimentConfig& config) {
  InstanceConfig ic;
  ic.configuration = config.configuration;
  ic.K = config.K;
  ic.delta = config.delta;
  ic.sigma = config.sigma;
  ic.shift = config.shift;
  const auto [cp_min, cp_max] = scenario_bounds(config.scenario, config.K);
  ic.changepoints = ChangePointSpec::uniform(cp_min, cp_max);
  return ic;
}

ReplicationResult run_policy(const BanditInstance& instance, const PolicySpec& policy,
                             const SigmaConfig& sigma, std::uint64_t replication_seed,
                             const std::vector<long>& budgets, bool keep_trace) {
  if (budgets.empty()) throw config_error("budgets must be non-empty");
  const int K = instance.num_arms();
  const int best = true_best(instance);

  ObservationStream stream(instance, replication_seed);
  Rng policy_rng(derive_seed(replication_seed, "policy"));
  SufficientStats stats(K);

  const long horizon = budgets.back();
  auto pol = make_policy(policy, K, horizon, sigma, policy_rng);

  ReplicationResult result;
  result.recommendation.reserve(budgets.size());

  std::size_t next_budget = 0;
  int prev_env = 1;
  for (long t = 1; t <= horizon; ++t) {
    const int j = stream.env_of(t);
    PolicyContext ctx;
    ctx.t = t;
    ctx.env_changed = (t > 1 && j != prev_env);
    ctx.env_ordinal = j;
    ctx.budget = horizon;
    ctx.stats = &stats;
    prev_env = j;

    const int arm = pol->choose(ctx);
    const double reward = stream.observe(arm, t);
    stats.record(j, arm, reward);
    pol->observe(ctx, arm, reward);

    while (next_budget < budgets.size() && budgets[next_budget] == t) {
      // Checkpoint tie-breaks use their own substream so recommending never
      // perturbs the policy's draw sequence.
      Rng rec_rng(derive_seed(replication_seed, "recommend", static_cast<std::uint64_t>(t)));
      const int rec = pol->recommend(stats, rec_rng);
      result.recommendation.push_back(rec);
      result.incorrect.push_back(rec == best ? 0 : 1);
      result.opportunity_cost.push_back(
          instance.arm_means[static_cast<std::size_t>(best)] -
          instance.arm_means[static_cast<std::size_t>(rec)]);
      ++next_budget;
    }
  }

  result.environments_seen = stream.env_of(horizon);
  result.warnings = pol->warnings();
  if (keep_trace) {
    result.trace = stream.trace();
    result.realized_shifts = stream.realized_shifts();
    result.realized_changepoints = stream.realized_changepoints();
  }
  return result;
}

ReplicationResult run_replication(const ExperimentConfig& config, const PolicySpec& policy,
                                  long rep_index, bool keep_trace) {
  const BanditInstance instance = make_instance(instance_config(config));
  const std::uint64_t rep_seed =
      derive_seed(config.base_seed, "replication", static_cast<std::uint64_t>(rep_index));
  SigmaConfig sigma_cfg;
  sigma_cfg.known_sigma2 = config.sigma * config.sigma;
  return run_policy(instance, policy, sigma_cfg, rep_seed, config.budgets, keep_trace);
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  validate(config);
  const std::size_t P = config.policies.size();
  const std::size_t B = config.budgets.size();
  const auto R = static_cast<std::size_t>(config.replications);

  ExperimentResult result;
  result.incorrect.assign(P, std::vector<std::vector<unsigned char>>(B, std::vector<unsigned char>(R, 0)));
  result.opportunity_cost.assign(P, std::vector<std::vector<double>>(B, std::vector<double>(R, 0.0)));

  std::atomic<long> warn_count{0};
  std::atomic<std::size_t> next_rep{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t rep = next_rep.fetch_add(1);
      if (rep >= R) return;
      for (std::size_t p = 0; p < P; ++p) {
        ReplicationResult rr =
            run_replication(config, config.policies[p], static_cast<long>(rep));
        for (std::size_t b = 0; b < B; ++b) {
          result.incorrect[p][b][rep] = rr.incorrect[b];
          result.opportunity_cost[p][b][rep] = rr.opportunity_cost[b];
        }
        if (!rr.warnings.empty()) warn_count.fetch_add(1);
      }
    }
  };

  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(R));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.sr_fallback_replications = warn_count.load();

  result.series.config_name = configuration_string(config.configuration);
  result.series.scenario_name = scenario_string(config.scenario);
  result.series.base_seed = config.base_seed;
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t b = 0; b < B; ++b) {
      MetricRow row;
      row.policy = policy_kind_string(config.policies[p]);
      row.budget = config.budgets[b];
      row.replications = config.replications;
      long wrong = 0;
      double eoc_sum = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        wrong += result.incorrect[p][b][r];
        eoc_sum += result.opportunity_cost[p][b][r];
      }
      const double pics = static_cast<double>(wrong) / static_cast<double>(R);
      row.pics = pics;
      row.pics_stderr = R > 0 ? std::sqrt(pics * (1.0 - pics) / static_cast<double>(R)) : 0.0;
      row.eoc = eoc_sum / static_cast<double>(R);
      if (R > 1) {
        double ss = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          const double d = result.opportunity_cost[p][b][r] - row.eoc;
          ss += d * d;
        }
        row.eoc_stderr = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
      }
      result.series.rows.push_back(std::move(row));
    }
  }
  return result;
}

PairedDiff paired_pics_diff(const ExperimentResult& result, std::size_t policy_a,
                            std::size_t policy_b, std::size_t budget_idx) {
  const auto& la = result.incorrect.at(policy_a).at(budget_idx);
  const auto& lb = result.incorrect.at(policy_b).at(budget_idx);
  const auto R = la.size();
  PairedDiff out;
  double mean = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    mean += static_cast<double>(la[r]) - static_cast<double>(lb[r]);
  mean /= static_cast<double>(R);
  out.diff = mean;
  if (R > 1) {
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double d = (static_cast<double>(la[r]) - static_cast<double>(lb[r])) - mean;
      ss += d * d;
    }
    out.paired_stderr = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
  }
  const std::size_t B = result.incorrect.at(policy_a).size();
  const auto& row_a = result.row(policy_a, budget_idx, B);
  const auto& row_b = result.row(policy_b, budget_idx, B);
  out.combined_stderr =
      std::sqrt(row_a.pics_stderr * row_a.pics_stderr + row_b.pics_stderr * row_b.pics_stderr);
  return out;
}

void write_csv(const MetricSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "config,scenario,policy,budget,replications,pics,pics_stderr,eoc,eoc_stderr,base_seed\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  for (const auto& row : series.rows) {
    out << series.config_name << ',' << series.scenario_name << ',' << row.policy << ','
        << row.budget << ',' << row.replications << ',' << fmt(row.pics) << ','
        << fmt(row.pics_stderr) << ',' << fmt(row.eoc) << ',' << fmt(row.eoc_stderr) << ','
        << series.base_seed << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace shiftbai
