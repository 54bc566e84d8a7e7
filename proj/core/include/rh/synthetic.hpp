#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rh/scenario.hpp"

namespace rh {

// One vehicle decelerates from `time` until it reaches final_speed; every
// vehicle behind it in the same lane follows suit after reaction_delay.
struct BrakingEvent {
  double time = 10.0;
  double deceleration = 4.0;
  double final_speed = 5.0;
  double reaction_delay = 1.0;
};

struct SyntheticSpec {
  int lanes = 3;
  double lane_width = 3.5;
  double road_length = 450.0;
  int vehicles = 0;
  double speed_min = 18.0;
  double speed_max = 28.0;
  double duration = 40.0;
  double timestep = 0.1;
  // Slot spacing is vehicle_length + min_gap; vehicles spawn over
  // [-spawn_upstream, road_length].
  double min_gap = 25.0;
  double spawn_upstream = 150.0;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  std::optional<BrakingEvent> braking;
  int lane_changes = 0;
  double lane_change_duration = 4.0;
};

// Pure function of (spec, seed). Lanes get ids 1..n from the right, y-up
// frame, travel towards +x, road [0, road_length]. Within a lane a follower
// never drives faster than its leader, so gaps only shrink through braking
// events or lane changes. Throws GenerationError when the requested layout cannot be met.
Scenario generate_synthetic_scenario(const SyntheticSpec& spec, std::uint64_t seed);

// Adds one no_overtaking_start sign at s ~ Uniform[100, 350] for the ego's
// direction. Throws RangeError when the road is shorter than 350 m.
Scenario insert_no_overtaking_sign(Scenario scenario, std::uint64_t seed);

// count scenarios; scenario i is generated from derive_seed(seed, "scenario/i")
// and, with_sign, gets a sign from the same derived seed.
std::vector<Scenario> generate_scenario_set(const SyntheticSpec& spec, int count,
                                            std::uint64_t seed, bool with_sign);

}  // namespace rh
