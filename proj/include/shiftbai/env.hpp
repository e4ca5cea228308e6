#pragma once

// Problem instances and the reward source for the piecewise-stationary
// global-shift model. Rewards are r = mu_i + s_j + sigma * eps, where the
// shift s_j is shared by all arms while environment j is active.
//
// Common-random-number contract: noise is indexed by (arm, per-arm pull
// count) and shifts/change points by environment ordinal, so two policies
// built on the same replication seed see the same potential observations
// no matter how they allocate samples.

#include <cstdint>
#include <optional>
#include <vector>

#include "shiftbai/rng.hpp"

namespace shiftbai {

struct ShiftSpec {
  enum class Kind { Zero, UniformContinuous, FixedSequence };

  Kind kind = Kind::Zero;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> values;

  static ShiftSpec zero() { return {}; }
  static ShiftSpec uniform(double lo, double hi) {
    ShiftSpec s;
    s.kind = Kind::UniformContinuous;
    s.lo = lo;
    s.hi = hi;
    return s;
  }
  static ShiftSpec fixed(std::vector<double> values) {
    ShiftSpec s;
    s.kind = Kind::FixedSequence;
    s.values = std::move(values);
    return s;
  }
};

struct ChangePointSpec {
  enum class Kind { UniformDiscrete, FixedSequence };

  Kind kind = Kind::UniformDiscrete;
  long cp_min = 2;
  long cp_max = 2;
  std::vector<long> lengths;

  static ChangePointSpec uniform(long cp_min, long cp_max) {
    ChangePointSpec c;
    c.kind = Kind::UniformDiscrete;
    c.cp_min = cp_min;
    c.cp_max = cp_max;
    return c;
  }
  // After the listed lengths are exhausted the final environment extends
  // indefinitely.
  static ChangePointSpec fixed(std::vector<long> lengths) {
    ChangePointSpec c;
    c.kind = Kind::FixedSequence;
    c.lengths = std::move(lengths);
    return c;
  }
};

struct BanditInstance {
  std::vector<double> arm_means;
  double noise_sd = 1.0;
  ShiftSpec shift;
  ChangePointSpec changepoints;

  int num_arms() const { return static_cast<int>(arm_means.size()); }
};

enum class Configuration { MDM, SC };

// Ground-truth section of an experiment configuration. MDM places arm means
// at delta*(i-1); SC gives every arm mean 0 except the last at delta.
struct InstanceConfig {
  Configuration configuration = Configuration::MDM;
  int K = 5;
  double delta = 0.5;
  double sigma = 1.0;
  ShiftSpec shift;
  ChangePointSpec changepoints;
};

BanditInstance make_instance(const InstanceConfig& config);

// Index of the unique argmax of the true means; throws config_error on ties.
int true_best(const BanditInstance& instance);

struct TraceEntry {
  long t;
  int env;  // environment ordinal, 1-based
  int arm;  // arm index, 0-based
  double reward;
};

class ObservationStream {
 public:
  ObservationStream(BanditInstance instance, std::uint64_t replication_seed);

  // Environment ordinal j with cp_{j-1} < t <= cp_j (cp_0 = 0); realizes
  // shifts and change points lazily up to t.
  int env_of(long t);

  // Reward for the k-th pull of `arm`, where k is this stream's running
  // pull count for the arm. t must strictly increase across calls.
  double observe(int arm, long t);

  double shift_of_env(int env_ordinal);  // realized s_j (ground truth)
  const BanditInstance& instance() const { return instance_; }
  std::uint64_t replication_seed() const { return seed_; }
  long pulls(int arm) const { return pull_counts_.at(static_cast<std::size_t>(arm)); }

  const std::vector<TraceEntry>& trace() const { return trace_; }
  const std::vector<double>& realized_shifts() const { return shifts_; }
  const std::vector<long>& realized_changepoints() const { return changepoints_; }

 private:
  void ensure_realized(long t);
  void realize_next_env();

  BanditInstance instance_;
  std::uint64_t seed_;
  Rng shift_rng_;
  Rng cp_rng_;
  std::vector<Rng> noise_rngs_;
  std::vector<long> pull_counts_;
  std::vector<double> shifts_;      // s_j, index j-1
  std::vector<long> changepoints_;  // cp_j (end step of environment j)
  bool open_ended_ = false;         // fixed length list exhausted
  long last_t_ = 0;
  std::vector<TraceEntry> trace_;
};

}  // namespace shiftbai
