#pragma once

// Allocation/selection policies. A policy is a deterministic state machine
// driven by the replication runner: notify change -> choose arm -> observe
// reward, repeated until the budget is spent; recommend() is pure and never
// samples.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shiftbai/ols.hpp"
#include "shiftbai/rng.hpp"
#include "shiftbai/stats.hpp"

namespace shiftbai {

enum class PolicyKind { LinLucb, RoundRobin, SampleMeanLucb, SuccessiveRejects, ReduceToMab };
enum class SigmaMode { Known, Estimated };

struct PolicySpec {
  PolicyKind kind = PolicyKind::LinLucb;
  PolicyKind inner = PolicyKind::RoundRobin;  // only for ReduceToMab
  int n0 = 6;
  SigmaMode sigma_mode = SigmaMode::Estimated;
};

// "linlucb", "round-robin", "sample-mean-lucb", "successive-rejects",
// "reduce-to-mab(<inner>)".
PolicySpec parse_policy_kind(const std::string& kind);
std::string policy_kind_string(const PolicySpec& spec);
std::vector<std::string> list_policy_kinds();

struct PolicyContext {
  long t = 0;               // step about to be sampled (1-based)
  bool env_changed = false; // first step of a new environment (false at t=1)
  int env_ordinal = 1;
  long budget = 0;
  const SufficientStats* stats = nullptr;
};

// Variance source for confidence widths: the known value when the
// configuration supplies it, otherwise the policy's plug-in estimate with
// a prior fallback before any degrees of freedom exist.
struct SigmaConfig {
  SigmaMode mode = SigmaMode::Estimated;
  std::optional<double> known_sigma2;
  double prior_sigma2 = 1.0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual int choose(const PolicyContext& ctx) = 0;
  virtual void observe(const PolicyContext& ctx, int arm, double reward) {
    (void)ctx; (void)arm; (void)reward;
  }
  virtual int recommend(const SufficientStats& stats, Rng& rng) const = 0;
  virtual std::vector<std::string> warnings() const { return {}; }
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int num_arms, long budget,
                                    const SigmaConfig& sigma, Rng& policy_rng);

// argmax over mu_hat with uniform random tie-breaking.
int select_best(const OlsFit& fit, Rng& rng);
// argmax over per-arm sample means; throws on an unsampled arm.
int select_best_sample_mean(const SufficientStats& stats, Rng& rng);

// Randomised round-robin initialisation. Plays n0 samples per arm in
// shuffled passes; until the first full pass completes, an environment
// change replays the previous arm so consecutive environments share an
// arm and the co-observation graph stays connected.
class RoundRobinInitializer {
 public:
  RoundRobinInitializer(int num_arms, int n0, Rng& rng);

  bool done() const { return used_ >= steps_total(); }
  long steps_total() const { return static_cast<long>(n0_) * num_arms_; }
  int next_arm(bool env_changed);
  bool build_tree_success() const { return bts_; }
  const std::vector<int>& samples_per_arm() const { return samples_; }

 private:
  void remove_if_saturated(int arm);

  int num_arms_;
  int n0_;
  Rng& rng_;
  std::vector<int> order_;    // arms still needing samples, current pass order
  std::vector<int> samples_;
  std::size_t pos_ = 0;       // index into order_ of the next arm to play
  int last_arm_ = -1;
  bool bts_ = false;          // one full shuffled pass has completed
  long used_ = 0;
};

}  // namespace shiftbai
