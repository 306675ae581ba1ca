#pragma once

// The rApp: a greedy multi-armed bandit over a grid of cluster thresholds.
// Each arm is one delta value; its expected reward Q is tracked with an
// exponential moving average of the observed median user throughput.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "stats.hpp"

namespace cfsim {

/// Q <- alpha r + (1 - alpha) Q
inline double ema_update(double q, double reward, double alpha) {
  return alpha * reward + (1.0 - alpha) * q;
}

struct BanditState {
  std::vector<double> q_values;          // bit/s
  std::vector<std::int64_t> pull_counts;
  std::optional<std::size_t> last_action;
  std::int64_t epoch = 0;

  static BanditState initial(const BanditConfig& cfg) {
    return {std::vector<double>(cfg.arms.size(), cfg.optimistic_init),
            std::vector<std::int64_t>(cfg.arms.size(), 0), std::nullopt, 0};
  }

  std::size_t num_arms() const noexcept { return q_values.size(); }
  bool operator==(const BanditState&) const = default;
};

/// Untried arms first (lowest index), then argmax Q with ties to the lowest
/// index. Pure in the state.
inline std::size_t greedy_arm(const BanditState& s) {
  for (std::size_t a = 0; a < s.pull_counts.size(); ++a) {
    if (s.pull_counts[a] == 0) return a;
  }
  std::size_t best = 0;
  for (std::size_t a = 1; a < s.q_values.size(); ++a) {
    if (s.q_values[a] > s.q_values[best]) best = a;
  }
  return best;
}

/// Median of per-user epoch-average throughputs.
inline double compute_reward(std::span<const double> samples) {
  if (samples.empty()) throw EmptyWindow();
  return stats::median(samples);
}

class GreedyBandit {
 public:
  explicit GreedyBandit(BanditConfig cfg) : cfg_(std::move(cfg)), state_(BanditState::initial(cfg_)) {}

  std::size_t select_action() {
    const std::size_t a = greedy_arm(state_);
    state_.last_action = a;
    return a;
  }

  void update(double reward) {
    if (!state_.last_action) throw NoPendingAction();
    if (!std::isfinite(reward) || reward < 0.0) {
      throw SimError("bandit reward must be finite and >= 0");
    }
    const std::size_t a = *state_.last_action;
    state_.q_values[a] = ema_update(state_.q_values[a], reward, cfg_.alpha);
    ++state_.pull_counts[a];
    ++state_.epoch;
    state_.last_action.reset();
  }

  double arm_delta(std::size_t arm) const { return cfg_.arms.at(arm); }
  const BanditConfig& config() const noexcept { return cfg_; }
  const BanditState& state() const noexcept { return state_; }

 private:
  BanditConfig cfg_;
  BanditState state_;
};

}  // namespace cfsim
