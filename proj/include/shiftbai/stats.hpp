#pragma once

// Sufficient statistics of the observation history: everything the joint
// mean/shift least-squares fit needs, plus incremental connectivity of the
// arm co-observation graph (arms are vertices; two arms are adjacent when
// some environment observed both).

#include <vector>

namespace shiftbai {

class SufficientStats {
 public:
  explicit SufficientStats(int num_arms);

  // Record one reward for `arm` (0-based) in environment `env_ordinal`
  // (1-based). Environments must arrive in order: env_ordinal equals the
  // current count or extends it by one.
  void record(int env_ordinal, int arm, double reward);

  int num_arms() const { return K_; }
  int num_envs() const { return static_cast<int>(env_counts_.size()); }  // J
  long total_count() const { return total_; }                            // N

  long count(int arm, int env_ordinal) const;      // n_ij
  double cell_sum(int arm, int env_ordinal) const; // sum of rewards in cell (i, j)
  long arm_count(int arm) const { return arm_counts_[idx(arm)]; }        // N_i
  double arm_total(int arm) const { return arm_totals_[idx(arm)]; }
  long env_count(int env_ordinal) const { return env_counts_[jdx(env_ordinal)]; }  // m_j
  double env_total(int env_ordinal) const { return env_totals_[jdx(env_ordinal)]; }
  double sq_sum() const { return sq_sum_; }

  double arm_mean(int arm) const;  // r-bar_i; throws if the arm is unsampled

  // True iff every arm has at least one sample and the co-observation graph
  // is connected (the identifiability condition of the joint fit).
  bool is_connected() const;

 private:
  std::size_t idx(int arm) const;
  std::size_t jdx(int env_ordinal) const;
  int uf_find(int a) const;

  int K_;
  std::vector<std::vector<long>> counts_;       // [env][arm]
  std::vector<std::vector<double>> cell_sums_;  // [env][arm]
  std::vector<long> arm_counts_;
  std::vector<double> arm_totals_;
  std::vector<long> env_counts_;
  std::vector<double> env_totals_;
  double sq_sum_ = 0.0;
  long total_ = 0;

  // Incremental union-find over arms; arms observed in the same
  // environment are united as records arrive.
  mutable std::vector<int> uf_parent_;
  std::vector<int> uf_rank_;
  std::vector<int> env_first_arm_;
  int sampled_arms_ = 0;
  int components_ = 0;
};

}  // namespace shiftbai
