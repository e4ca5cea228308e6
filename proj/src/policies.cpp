#include "shiftbai/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shiftbai/errors.hpp"

namespace shiftbai {

namespace {

// argmax with uniform random tie-breaking over exact ties.
template <typename ValueFn>
int argmax_tiebreak(int n, Rng& rng, ValueFn&& value, int exclude = -1) {
  double best = -std::numeric_limits<double>::infinity();
  int chosen = -1;
  std::uint64_t ties = 0;
  for (int i = 0; i < n; ++i) {
    if (i == exclude) continue;
    const double v = value(i);
    if (v > best) {
      best = v;
      chosen = i;
      ties = 1;
    } else if (v == best) {
      // reservoir pick keeps the choice uniform without collecting ties
      ++ties;
      if (rng.bounded(ties) == 0) chosen = i;
    }
  }
  if (chosen < 0) throw std::invalid_argument("argmax over an empty candidate set");
  return chosen;
}

}  // namespace

PolicySpec parse_policy_kind(const std::string& kind) {
  PolicySpec spec;
  if (kind == "linlucb") {
    spec.kind = PolicyKind::LinLucb;
  } else if (kind == "round-robin") {
    spec.kind = PolicyKind::RoundRobin;
  } else if (kind == "sample-mean-lucb") {
    spec.kind = PolicyKind::SampleMeanLucb;
  } else if (kind == "successive-rejects") {
    spec.kind = PolicyKind::SuccessiveRejects;
  } else if (kind.rfind("reduce-to-mab(", 0) == 0 && kind.back() == ')') {
    spec.kind = PolicyKind::ReduceToMab;
    const std::string inner = kind.substr(14, kind.size() - 15);
    if (inner == "round-robin") {
      spec.inner = PolicyKind::RoundRobin;
    } else if (inner == "sample-mean-lucb") {
      spec.inner = PolicyKind::SampleMeanLucb;
    } else {
      throw config_error("reduce-to-mab inner policy must be stationary "
                         "(round-robin or sample-mean-lucb), got '" + inner + "'");
    }
  } else {
    throw config_error("unknown policy kind '" + kind + "'");
  }
  return spec;
}

std::string policy_kind_string(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::LinLucb: return "linlucb";
    case PolicyKind::RoundRobin: return "round-robin";
    case PolicyKind::SampleMeanLucb: return "sample-mean-lucb";
    case PolicyKind::SuccessiveRejects: return "successive-rejects";
    case PolicyKind::ReduceToMab:
      return "reduce-to-mab(" +
             std::string(spec.inner == PolicyKind::RoundRobin ? "round-robin"
                                                              : "sample-mean-lucb") +
             ")";
  }
  return "unknown";
}

std::vector<std::string> list_policy_kinds() {
  return {"linlucb", "round-robin", "sample-mean-lucb", "successive-rejects",
          "reduce-to-mab(round-robin|sample-mean-lucb)"};
}

int select_best(const OlsFit& fit, Rng& rng) {
  return argmax_tiebreak(static_cast<int>(fit.mu_hat.size()), rng,
                         [&](int i) { return fit.mu_hat(i); });
}

int select_best_sample_mean(const SufficientStats& stats, Rng& rng) {
  return argmax_tiebreak(stats.num_arms(), rng, [&](int i) { return stats.arm_mean(i); });
}

// --- Algorithm: randomised round-robin initialisation -----------------------

RoundRobinInitializer::RoundRobinInitializer(int num_arms, int n0, Rng& rng)
    : num_arms_(num_arms), n0_(n0), rng_(rng) {
  if (n0 < 2) throw config_error("n0 must be >= 2");
  if (num_arms < 2) throw config_error("initialisation needs at least 2 arms");
  order_.resize(static_cast<std::size_t>(num_arms));
  for (int i = 0; i < num_arms; ++i) order_[static_cast<std::size_t>(i)] = i;
  rng_.shuffle(order_);
  samples_.assign(static_cast<std::size_t>(num_arms), 0);
}

void RoundRobinInitializer::remove_if_saturated(int arm) {
  if (samples_[static_cast<std::size_t>(arm)] < n0_) return;
  auto it = std::find(order_.begin(), order_.end(), arm);
  if (it == order_.end()) return;
  const auto ia = static_cast<std::size_t>(it - order_.begin());
  order_.erase(it);
  if (ia < pos_) {
    --pos_;
  } else if (pos_ >= order_.size() && !order_.empty()) {
    pos_ = 0;
  }
}

int RoundRobinInitializer::next_arm(bool env_changed) {
  if (done()) throw std::logic_error("initialisation already complete");
  int arm;
  if (env_changed && !bts_ && last_arm_ >= 0) {
    // Bridge: replay the previous arm so it appears in both environments.
    arm = last_arm_;
    ++samples_[static_cast<std::size_t>(arm)];
    ++used_;
    remove_if_saturated(arm);
  } else {
    const bool was_last = (pos_ + 1 == order_.size());
    arm = order_[pos_];
    ++samples_[static_cast<std::size_t>(arm)];
    ++used_;
    if (samples_[static_cast<std::size_t>(arm)] >= n0_) {
      order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(pos_));
    } else {
      ++pos_;
    }
    if (was_last) {
      rng_.shuffle(order_);
      pos_ = 0;
      bts_ = true;
    }
  }
  last_arm_ = arm;
  return arm;
}

namespace {

// Pair scheduler for LUCB-style alternation: both arms of a pair are picked
// from the fit available at pair start (mimicked batch sampling). Three
// scenarios keep the first two samples of every new environment distinct:
//   1. change at pair start: play l then u;
//   2. change at the previous pair's second step while the current greedy
//      arm equals the arm just played: swap, play u then l;
//   3. otherwise: play l then u.
struct PairScheduler {
  std::optional<int> pending;
  bool recent_change = false;
  int last_arm = -1;

  template <typename PickPair>
  int step(bool env_changed, PickPair&& pick) {
    if (pending) {
      const int a = *pending;
      pending.reset();
      recent_change = env_changed;
      last_arm = a;
      return a;
    }
    const auto [l, u] = pick();
    int first = l, second = u;
    if (!env_changed && recent_change && l == last_arm) {
      first = u;
      second = l;
    }
    recent_change = false;
    pending = second;
    last_arm = first;
    return first;
  }
};

double width_from_counts(double sigma2, long t, long n_arm) {
  // Stationary confidence width sqrt(16 ln(t) sigma^2 / N_i^2).
  return std::sqrt(16.0 * std::log(static_cast<double>(t)) * sigma2) /
         static_cast<double>(n_arm);
}

class LinLucbPolicy final : public Policy {
 public:
  LinLucbPolicy(int num_arms, int n0, SigmaConfig sigma, Rng& rng)
      : K_(num_arms), sigma_(sigma), rng_(rng), init_(num_arms, n0, rng) {}

  int choose(const PolicyContext& ctx) override {
    if (!init_.done()) {
      const int a = init_.next_arm(ctx.env_changed);
      pair_.last_arm = a;
      return a;
    }
    return pair_.step(ctx.env_changed, [&] { return pick_pair(*ctx.stats, ctx.t); });
  }

  int recommend(const SufficientStats& stats, Rng& rng) const override {
    return select_best(current_fit(stats), rng);
  }

 private:
  const OlsFit& current_fit(const SufficientStats& stats) const {
    if (!fit_ || fit_stamp_ != stats.total_count()) {
      fit_ = fit_ols(stats,
                     sigma_.mode == SigmaMode::Known ? sigma_.known_sigma2 : std::nullopt,
                     /*with_full_covariance=*/false);
      fit_stamp_ = stats.total_count();
    }
    return *fit_;
  }

  double sigma2_for_width(const OlsFit& fit) const {
    if (fit.sigma2_hat) return *fit.sigma2_hat;
    return sigma_.known_sigma2.value_or(sigma_.prior_sigma2);
  }

  std::pair<int, int> pick_pair(const SufficientStats& stats, long t) {
    const OlsFit& fit = current_fit(stats);
    const int l = select_best(fit, rng_);
    const Eigen::MatrixXd cov = mean_covariance(fit, sigma2_for_width(fit));
    counts_buf_.resize(static_cast<std::size_t>(K_));
    for (int i = 0; i < K_; ++i) counts_buf_[static_cast<std::size_t>(i)] = stats.arm_count(i);
    const int u = argmax_tiebreak(
        K_, rng_, [&](int i) { return ucb(fit, cov, i, t, counts_buf_); }, l);
    return {l, u};
  }

  int K_;
  SigmaConfig sigma_;
  Rng& rng_;
  RoundRobinInitializer init_;
  PairScheduler pair_;
  mutable std::optional<OlsFit> fit_;
  mutable long fit_stamp_ = -1;
  std::vector<long> counts_buf_;
};

class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(int num_arms) : K_(num_arms) {}

  int choose(const PolicyContext& ctx) override {
    return static_cast<int>((ctx.t - 1) % K_);
  }

  int recommend(const SufficientStats& stats, Rng& rng) const override {
    return select_best_sample_mean(stats, rng);
  }

 private:
  int K_;
};

// Stationary LUCB with sample means and the UCB1-normal style bound; applied
// unchanged under environment shifts (it ignores the change signal).
class SampleMeanLucbPolicy final : public Policy {
 public:
  SampleMeanLucbPolicy(int num_arms, SigmaConfig sigma, Rng& rng)
      : K_(num_arms), sigma_(sigma), rng_(rng) {
    init_order_.resize(static_cast<std::size_t>(num_arms));
    for (int i = 0; i < num_arms; ++i) init_order_[static_cast<std::size_t>(i)] = i;
    rng_.shuffle(init_order_);
  }

  int choose(const PolicyContext& ctx) override {
    if (init_pos_ < init_order_.size()) {
      const int a = init_order_[init_pos_++];
      pair_.last_arm = a;
      return a;
    }
    return pair_.step(false, [&] { return pick_pair(*ctx.stats, ctx.t); });
  }

  int recommend(const SufficientStats& stats, Rng& rng) const override {
    return select_best_sample_mean(stats, rng);
  }

 private:
  double sigma2_plugin(const SufficientStats& stats) const {
    if (sigma_.mode == SigmaMode::Known && sigma_.known_sigma2) return *sigma_.known_sigma2;
    const long dof = stats.total_count() - K_;
    if (dof >= 1) {
      double within = stats.sq_sum();
      for (int i = 0; i < K_; ++i) {
        const double mean = stats.arm_mean(i);
        within -= static_cast<double>(stats.arm_count(i)) * mean * mean;
      }
      return std::max(0.0, within) / static_cast<double>(dof);
    }
    return sigma_.known_sigma2.value_or(sigma_.prior_sigma2);
  }

  std::pair<int, int> pick_pair(const SufficientStats& stats, long t) {
    const int l = select_best_sample_mean(stats, rng_);
    const double s2 = sigma2_plugin(stats);
    const int u = argmax_tiebreak(
        K_, rng_,
        [&](int i) { return stats.arm_mean(i) + width_from_counts(s2, t, stats.arm_count(i)); },
        l);
    return {l, u};
  }

  int K_;
  SigmaConfig sigma_;
  Rng& rng_;
  std::vector<int> init_order_;
  std::size_t init_pos_ = 0;
  PairScheduler pair_;
};

class SuccessiveRejectsPolicy final : public Policy {
 public:
  SuccessiveRejectsPolicy(int num_arms, long budget, Rng& rng) : K_(num_arms), rng_(rng) {
    double logbar = 0.5;
    for (int i = 2; i <= K_; ++i) logbar += 1.0 / i;
    std::vector<long> nk(static_cast<std::size_t>(K_ - 1), 0);
    if (budget > K_) {
      for (int k = 1; k <= K_ - 1; ++k)
        nk[static_cast<std::size_t>(k - 1)] = static_cast<long>(
            std::floor(static_cast<double>(budget - K_) / (logbar * (K_ + 1 - k))));
    }
    if (budget < K_ || nk.front() < 1) {
      fallback_ = true;
      return;
    }
    long used = 0, prev = 0;
    for (int k = 1; k <= K_ - 1; ++k) {
      used += static_cast<long>(K_ + 1 - k) * (nk[static_cast<std::size_t>(k - 1)] - prev);
      prev = nk[static_cast<std::size_t>(k - 1)];
      boundaries_.push_back(std::min(used, budget));
    }
    boundaries_.back() = budget;  // slack goes to the last phase
    active_.resize(static_cast<std::size_t>(K_));
    for (int i = 0; i < K_; ++i) active_[static_cast<std::size_t>(i)] = i;
  }

  int choose(const PolicyContext& ctx) override {
    if (fallback_) return static_cast<int>((ctx.t - 1) % K_);
    while (phase_ < boundaries_.size() && used_ >= boundaries_[phase_] && active_.size() > 1)
      eliminate_worst(*ctx.stats);
    if (pass_pos_ >= pass_order_.size()) {
      pass_order_ = active_;
      rng_.shuffle(pass_order_);
      pass_pos_ = 0;
    }
    ++used_;
    return pass_order_[pass_pos_++];
  }

  int recommend(const SufficientStats& stats, Rng& rng) const override {
    if (fallback_) return select_best_sample_mean(stats, rng);
    return active_[static_cast<std::size_t>(argmax_tiebreak(
        static_cast<int>(active_.size()), rng,
        [&](int k) { return stats.arm_mean(active_[static_cast<std::size_t>(k)]); }))];
  }

  std::vector<std::string> warnings() const override {
    if (fallback_)
      return {"budget too small for the successive-rejects schedule; running round-robin"};
    return {};
  }

 private:
  void eliminate_worst(const SufficientStats& stats) {
    const int worst = argmax_tiebreak(
        static_cast<int>(active_.size()), rng_,
        [&](int k) { return -stats.arm_mean(active_[static_cast<std::size_t>(k)]); });
    active_.erase(active_.begin() + worst);
    pass_order_.clear();  // new phase resamples the survivors in a fresh order
    pass_pos_ = 0;
    ++phase_;
  }

  int K_;
  Rng& rng_;
  bool fallback_ = false;
  std::vector<long> boundaries_;  // cumulative sample counts at phase ends
  std::vector<int> active_;
  std::vector<int> pass_order_;
  std::size_t pass_pos_ = 0;
  std::size_t phase_ = 0;
  long used_ = 0;
};

// Reduce-to-MAB: run a stationary policy on shift-subtracted rewards. The
// sample mean of subtracted rewards equals the OLS mean estimator exactly,
// so the inner statistics are computed from the joint fit instead of a
// rewritten history. Algorithm-1 initialisation and the two-distinct-arms
// rule are imposed on the wrapped policy.
class ReduceToMabPolicy final : public Policy {
 public:
  ReduceToMabPolicy(PolicyKind inner, int num_arms, int n0, SigmaConfig sigma, Rng& rng)
      : inner_(inner), K_(num_arms), sigma_(sigma), rng_(rng), init_(num_arms, n0, rng) {}

  int choose(const PolicyContext& ctx) override {
    if (!init_.done()) {
      const int a = init_.next_arm(ctx.env_changed);
      pair_.last_arm = a;
      return a;
    }
    if (inner_ == PolicyKind::RoundRobin) return static_cast<int>((ctx.t - 1) % K_);
    return pair_.step(ctx.env_changed, [&] { return pick_pair(*ctx.stats, ctx.t); });
  }

  int recommend(const SufficientStats& stats, Rng& rng) const override {
    return select_best(current_fit(stats), rng);
  }

 private:
  const OlsFit& current_fit(const SufficientStats& stats) const {
    if (!fit_ || fit_stamp_ != stats.total_count()) {
      fit_ = fit_ols(stats,
                     sigma_.mode == SigmaMode::Known ? sigma_.known_sigma2 : std::nullopt,
                     /*with_full_covariance=*/false);
      fit_stamp_ = stats.total_count();
    }
    return *fit_;
  }

  double subtracted_sigma2(const OlsFit& fit, const SufficientStats& stats) const {
    if (sigma_.mode == SigmaMode::Known && sigma_.known_sigma2) return *sigma_.known_sigma2;
    // Residuals about (mu_hat_i + s_hat_j) are exactly the residuals of the
    // subtracted rewards about their per-arm means; only the divisor treats
    // the shifts as known.
    const long dof = stats.total_count() - K_;
    if (dof >= 1) return fit.rss / static_cast<double>(dof);
    return sigma_.known_sigma2.value_or(sigma_.prior_sigma2);
  }

  std::pair<int, int> pick_pair(const SufficientStats& stats, long t) {
    const OlsFit& fit = current_fit(stats);
    const int l = select_best(fit, rng_);
    const double s2 = subtracted_sigma2(fit, stats);
    const int u = argmax_tiebreak(
        K_, rng_,
        [&](int i) { return fit.mu_hat(i) + width_from_counts(s2, t, stats.arm_count(i)); }, l);
    return {l, u};
  }

  PolicyKind inner_;
  int K_;
  SigmaConfig sigma_;
  Rng& rng_;
  RoundRobinInitializer init_;
  PairScheduler pair_;
  mutable std::optional<OlsFit> fit_;
  mutable long fit_stamp_ = -1;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int num_arms, long budget,
                                    const SigmaConfig& sigma, Rng& policy_rng) {
  if (spec.n0 < 2) throw config_error("policy n0 must be >= 2");
  SigmaConfig sc = sigma;
  sc.mode = spec.sigma_mode;
  switch (spec.kind) {
    case PolicyKind::LinLucb:
      return std::make_unique<LinLucbPolicy>(num_arms, spec.n0, sc, policy_rng);
    case PolicyKind::RoundRobin:
      return std::make_unique<RoundRobinPolicy>(num_arms);
    case PolicyKind::SampleMeanLucb:
      return std::make_unique<SampleMeanLucbPolicy>(num_arms, sc, policy_rng);
    case PolicyKind::SuccessiveRejects:
      return std::make_unique<SuccessiveRejectsPolicy>(num_arms, budget, policy_rng);
    case PolicyKind::ReduceToMab:
      return std::make_unique<ReduceToMabPolicy>(spec.inner, num_arms, spec.n0, sc, policy_rng);
  }
  throw config_error("unknown policy kind");
}

}  // namespace shiftbai
