#include "shiftbai/env.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "shiftbai/errors.hpp"

namespace shiftbai {

namespace {

void validate_shift(const ShiftSpec& s) {
  if (s.kind == ShiftSpec::Kind::UniformContinuous && s.lo > s.hi)
    throw config_error("shift: lo > hi");
  if (s.kind == ShiftSpec::Kind::FixedSequence && s.values.empty())
    throw config_error("shift: fixed sequence is empty");
}

void validate_changepoints(const ChangePointSpec& c) {
  if (c.kind == ChangePointSpec::Kind::UniformDiscrete) {
    if (c.cp_min < 2) throw config_error("changepoints: cp_min must be >= 2");
    if (c.cp_max < c.cp_min) throw config_error("changepoints: cp_max < cp_min");
  } else {
    for (long len : c.lengths)
      if (len < 2) throw config_error("changepoints: every environment length must be >= 2");
  }
}

}  // namespace

BanditInstance make_instance(const InstanceConfig& config) {
  if (config.K < 2) throw config_error("K must be >= 2");
  if (!(config.sigma > 0.0)) throw config_error("sigma must be > 0");
  if (!(config.delta > 0.0)) throw config_error("delta must be > 0");
  validate_shift(config.shift);
  validate_changepoints(config.changepoints);

  BanditInstance inst;
  inst.arm_means.resize(static_cast<std::size_t>(config.K));
  if (config.configuration == Configuration::MDM) {
    for (int i = 0; i < config.K; ++i)
      inst.arm_means[static_cast<std::size_t>(i)] = config.delta * i;
  } else {
    std::fill(inst.arm_means.begin(), inst.arm_means.end(), 0.0);
    inst.arm_means.back() = config.delta;
  }
  inst.noise_sd = config.sigma;
  inst.shift = config.shift;
  inst.changepoints = config.changepoints;
  return inst;
}

int true_best(const BanditInstance& instance) {
  if (instance.arm_means.empty()) throw config_error("instance has no arms");
  int best = 0;
  for (int i = 1; i < instance.num_arms(); ++i)
    if (instance.arm_means[static_cast<std::size_t>(i)] >
        instance.arm_means[static_cast<std::size_t>(best)])
      best = i;
  for (int i = 0; i < instance.num_arms(); ++i)
    if (i != best && instance.arm_means[static_cast<std::size_t>(i)] ==
                         instance.arm_means[static_cast<std::size_t>(best)])
      throw config_error("tie-in-truth: arm means have no unique argmax");
  return best;
}

ObservationStream::ObservationStream(BanditInstance instance, std::uint64_t replication_seed)
    : instance_(std::move(instance)),
      seed_(replication_seed),
      shift_rng_(derive_seed(replication_seed, "shift")),
      cp_rng_(derive_seed(replication_seed, "changepoint")) {
  const int K = instance_.num_arms();
  if (K < 1) throw config_error("instance has no arms");
  noise_rngs_.reserve(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i)
    noise_rngs_.emplace_back(derive_seed(replication_seed, "noise", static_cast<std::uint64_t>(i)));
  pull_counts_.assign(static_cast<std::size_t>(K), 0);
}

void ObservationStream::realize_next_env() {
  const auto j = shifts_.size();  // 0-based index of the environment to realize
  double s;
  switch (instance_.shift.kind) {
    case ShiftSpec::Kind::Zero:
      s = 0.0;
      break;
    case ShiftSpec::Kind::UniformContinuous:
      s = shift_rng_.uniform(instance_.shift.lo, instance_.shift.hi);
      break;
    case ShiftSpec::Kind::FixedSequence:
      if (j >= instance_.shift.values.size())
        throw config_error("fixed shift sequence exhausted at environment " +
                           std::to_string(j + 1));
      s = instance_.shift.values[j];
      break;
    default:
      s = 0.0;
  }
  shifts_.push_back(s);

  long len;
  const auto& cp = instance_.changepoints;
  if (cp.kind == ChangePointSpec::Kind::UniformDiscrete) {
    len = cp_rng_.uniform_int(cp.cp_min, cp.cp_max);
  } else if (j < cp.lengths.size()) {
    len = cp.lengths[j];
  } else {
    open_ended_ = true;
    len = std::numeric_limits<long>::max() / 2;
  }
  const long prev_end = changepoints_.empty() ? 0 : changepoints_.back();
  changepoints_.push_back(prev_end + len);
}

void ObservationStream::ensure_realized(long t) {
  while (changepoints_.empty() || (changepoints_.back() < t && !open_ended_)) realize_next_env();
}

int ObservationStream::env_of(long t) {
  if (t < 1) throw std::invalid_argument("time step must be >= 1");
  ensure_realized(t);
  auto it = std::lower_bound(changepoints_.begin(), changepoints_.end(), t);
  return static_cast<int>(it - changepoints_.begin()) + 1;
}

double ObservationStream::shift_of_env(int env_ordinal) {
  if (env_ordinal < 1) throw std::invalid_argument("environment ordinal must be >= 1");
  while (static_cast<std::size_t>(env_ordinal) > shifts_.size() && !open_ended_)
    realize_next_env();
  if (static_cast<std::size_t>(env_ordinal) > shifts_.size())
    throw std::invalid_argument("environment beyond the realized horizon");
  return shifts_[static_cast<std::size_t>(env_ordinal - 1)];
}

double ObservationStream::observe(int arm, long t) {
  if (arm < 0 || arm >= instance_.num_arms()) throw std::invalid_argument("arm index out of range");
  if (t <= last_t_) throw std::invalid_argument("time steps must strictly increase");
  last_t_ = t;
  const int j = env_of(t);
  const double eps = noise_rngs_[static_cast<std::size_t>(arm)].normal();
  ++pull_counts_[static_cast<std::size_t>(arm)];
  const double r = instance_.arm_means[static_cast<std::size_t>(arm)] +
                   shifts_[static_cast<std::size_t>(j - 1)] + instance_.noise_sd * eps;
  trace_.push_back({t, j, arm, r});
  return r;
}

}  // namespace shiftbai
