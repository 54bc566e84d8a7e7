#pragma once

#include <cstddef>

#include "rh/rules.hpp"

namespace rh {

struct RewardParams {
  double rule_weight = 10.0;
  double progression_weight = 8.0;
  double reference_speed = 15.0;  // m/s
  double timestep = 0.1;
  double clip = 10.0;
};

// weight * [w * max(0, s1 - s0) / (v_ref * dt) + (1 - w) * s1 / L] with
// w = 1 - s1 / L. Positions are progress along the route, in [0, L].
double reward_progression(double s0, double s1, double route_length,
                          const RewardParams& params = {});

struct RuleReward {
  double value = 0.0;
  bool invalid = false;  // robustness undefined at this index, value is 0
};

// weight * clip(body robustness at index i).
RuleReward reward_rule(RuleId phase, const WorldView& world, std::size_t i,
                       const RuleParams& rules, const RewardParams& params = {});

}  // namespace rh
