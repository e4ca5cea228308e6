#include "shiftbai/stats.hpp"

#include <stdexcept>
#include <string>

namespace shiftbai {

SufficientStats::SufficientStats(int num_arms) : K_(num_arms) {
  if (num_arms < 1) throw std::invalid_argument("num_arms must be >= 1");
  arm_counts_.assign(static_cast<std::size_t>(K_), 0);
  arm_totals_.assign(static_cast<std::size_t>(K_), 0.0);
  uf_parent_.resize(static_cast<std::size_t>(K_));
  uf_rank_.assign(static_cast<std::size_t>(K_), 0);
  for (int i = 0; i < K_; ++i) uf_parent_[static_cast<std::size_t>(i)] = i;
}

std::size_t SufficientStats::idx(int arm) const {
  if (arm < 0 || arm >= K_) throw std::invalid_argument("arm index out of range");
  return static_cast<std::size_t>(arm);
}

std::size_t SufficientStats::jdx(int env_ordinal) const {
  if (env_ordinal < 1 || env_ordinal > num_envs())
    throw std::invalid_argument("environment ordinal out of range");
  return static_cast<std::size_t>(env_ordinal - 1);
}

long SufficientStats::count(int arm, int env_ordinal) const {
  return counts_[jdx(env_ordinal)][idx(arm)];
}

double SufficientStats::cell_sum(int arm, int env_ordinal) const {
  return cell_sums_[jdx(env_ordinal)][idx(arm)];
}

double SufficientStats::arm_mean(int arm) const {
  const std::size_t i = idx(arm);
  if (arm_counts_[i] == 0)
    throw std::invalid_argument("unsampled arm " + std::to_string(arm));
  return arm_totals_[i] / static_cast<double>(arm_counts_[i]);
}

int SufficientStats::uf_find(int a) const {
  while (uf_parent_[static_cast<std::size_t>(a)] != a) {
    uf_parent_[static_cast<std::size_t>(a)] =
        uf_parent_[static_cast<std::size_t>(uf_parent_[static_cast<std::size_t>(a)])];
    a = uf_parent_[static_cast<std::size_t>(a)];
  }
  return a;
}

void SufficientStats::record(int env_ordinal, int arm, double reward) {
  const std::size_t i = idx(arm);
  const int J = num_envs();
  if (env_ordinal < 1 || env_ordinal > J + 1)
    throw std::invalid_argument("environment ordinal out of order: got " +
                                std::to_string(env_ordinal) + " with " + std::to_string(J) +
                                " environments recorded");
  if (env_ordinal < J)
    throw std::invalid_argument("environment ordinal out of order: environments only advance");
  if (env_ordinal == J + 1) {
    counts_.emplace_back(static_cast<std::size_t>(K_), 0);
    cell_sums_.emplace_back(static_cast<std::size_t>(K_), 0.0);
    env_counts_.push_back(0);
    env_totals_.push_back(0.0);
    env_first_arm_.push_back(-1);
  }
  const std::size_t j = static_cast<std::size_t>(env_ordinal - 1);

  if (arm_counts_[i] == 0) {
    ++sampled_arms_;
    ++components_;
  }
  if (counts_[j][i] == 0) {
    int& first = env_first_arm_[j];
    if (first < 0) {
      first = arm;
    } else {
      int ra = uf_find(arm), rb = uf_find(first);
      if (ra != rb) {
        if (uf_rank_[static_cast<std::size_t>(ra)] < uf_rank_[static_cast<std::size_t>(rb)])
          std::swap(ra, rb);
        uf_parent_[static_cast<std::size_t>(rb)] = ra;
        if (uf_rank_[static_cast<std::size_t>(ra)] == uf_rank_[static_cast<std::size_t>(rb)])
          ++uf_rank_[static_cast<std::size_t>(ra)];
        --components_;
      }
    }
  }

  ++counts_[j][i];
  cell_sums_[j][i] += reward;
  ++arm_counts_[i];
  arm_totals_[i] += reward;
  ++env_counts_[j];
  env_totals_[j] += reward;
  sq_sum_ += reward * reward;
  ++total_;
}

bool SufficientStats::is_connected() const {
  return sampled_arms_ == K_ && components_ == 1;
}

}  // namespace shiftbai
