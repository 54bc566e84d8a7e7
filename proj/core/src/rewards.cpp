#include "rh/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "rh/error.hpp"

namespace rh {

double reward_progression(double s0, double s1, double L, const RewardParams& p) {
  if (!(L > 0.0)) throw RangeError("route length must be positive");
  const double w = 1.0 - s1 / L;
  const double rate = std::max(0.0, s1 - s0) / (p.reference_speed * p.timestep);
  return p.progression_weight * (w * rate + (1.0 - w) * (s1 / L));
}

RuleReward reward_rule(RuleId phase, const WorldView& world, std::size_t i,
                       const RuleParams& rules, const RewardParams& p) {
  const auto r = rule_robustness(phase, world, i, rules);
  if (!r) return {0.0, true};
  return {p.rule_weight * clip_robustness(*r, p.clip), false};
}

}  // namespace rh
