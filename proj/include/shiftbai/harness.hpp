#pragma once

// Declarative experiment runner: replicated policy evaluation under common
// random numbers, PICS/EOC aggregation over a budget grid, CSV output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftbai/env.hpp"
#include "shiftbai/policies.hpp"

namespace shiftbai {

enum class Scenario { WorstCase, CannotSampleAllArms, Sample1To10PerArm, General, Custom };

struct ScenarioSpec {
  Scenario kind = Scenario::General;
  long cp_min = 0;  // Custom only
  long cp_max = 0;

  static ScenarioSpec named(Scenario s) { return {s, 0, 0}; }
  static ScenarioSpec custom(long cp_min, long cp_max) { return {Scenario::Custom, cp_min, cp_max}; }
};

// Environment-length bounds per scenario: worst-case (2, 2),
// cannot-sample-all-arms (2, K-1), sample-1to10-per-arm (K, 10K),
// general (2, 10K).
std::pair<long, long> scenario_bounds(const ScenarioSpec& scenario, int K);

std::string scenario_string(const ScenarioSpec& scenario);
std::string configuration_string(Configuration c);

struct ExperimentConfig {
  Configuration configuration = Configuration::MDM;
  int K = 5;
  double delta = 0.5;
  double sigma = 1.0;
  ShiftSpec shift = ShiftSpec::uniform(0.0, 20.0);
  ScenarioSpec scenario;
  std::vector<long> budgets;
  long replications = 1;
  std::uint64_t base_seed = 0;
  std::vector<PolicySpec> policies;
};

void validate(const ExperimentConfig& config);
InstanceConfig instance_config(const ExperimentConfig& config);

struct ReplicationResult {
  std::vector<int> recommendation;        // per budget
  std::vector<unsigned char> incorrect;   // 0-1 loss per budget
  std::vector<double> opportunity_cost;   // mu_best - mu_recommended per budget
  int environments_seen = 0;
  std::vector<std::string> warnings;
  // Populated only when keep_trace is requested.
  std::vector<TraceEntry> trace;
  std::vector<double> realized_shifts;
  std::vector<long> realized_changepoints;
};

// Runs one policy on one instance to the largest budget, recording the pure
// recommendation at every budget checkpoint.
ReplicationResult run_policy(const BanditInstance& instance, const PolicySpec& policy,
                             const SigmaConfig& sigma, std::uint64_t replication_seed,
                             const std::vector<long>& budgets, bool keep_trace = false);

// Replication entry point: the replication seed is derived from
// (base_seed, rep_index) only, so every policy sees the same potential
// observations.
ReplicationResult run_replication(const ExperimentConfig& config, const PolicySpec& policy,
                                  long rep_index, bool keep_trace = false);

struct MetricRow {
  std::string policy;
  long budget = 0;
  long replications = 0;
  double pics = 0.0;
  double pics_stderr = 0.0;
  double eoc = 0.0;
  double eoc_stderr = 0.0;
};

struct MetricSeries {
  std::string config_name;
  std::string scenario_name;
  std::uint64_t base_seed = 0;
  std::vector<MetricRow> rows;  // policy-major, budgets ascending
};

struct ExperimentResult {
  MetricSeries series;
  // Raw per-replication losses, [policy][budget][rep]; kept for paired
  // comparisons between policies run under common random numbers.
  std::vector<std::vector<std::vector<unsigned char>>> incorrect;
  std::vector<std::vector<std::vector<double>>> opportunity_cost;
  long sr_fallback_replications = 0;

  const MetricRow& row(std::size_t policy_idx, std::size_t budget_idx,
                       std::size_t num_budgets) const {
    return series.rows.at(policy_idx * num_budgets + budget_idx);
  }
};

// threads == 0 picks the hardware concurrency. Output is byte-identical
// across runs and thread counts.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

struct PairedDiff {
  double diff = 0.0;            // pics(a) - pics(b)
  double paired_stderr = 0.0;   // stderr of the per-replication loss difference
  double combined_stderr = 0.0; // sqrt(se_a^2 + se_b^2)
};

PairedDiff paired_pics_diff(const ExperimentResult& result, std::size_t policy_a,
                            std::size_t policy_b, std::size_t budget_idx);

// Header: config,scenario,policy,budget,replications,pics,pics_stderr,
// eoc,eoc_stderr,base_seed. One row per (policy, budget), 10 significant
// digits, deterministic order.
void write_csv(const MetricSeries& series, const std::string& path);

}  // namespace shiftbai
