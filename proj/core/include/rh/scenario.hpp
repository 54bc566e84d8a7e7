#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "rh/lane_network.hpp"

namespace rh {

// Native-frame kinematic state of one vehicle at one grid step.
struct VehicleState {
  int id = 0;
  Vec2 position;  // bounding-box centre
  Vec2 velocity;
  Vec2 acceleration;
  double heading = 0.0;  // radians, (-pi, pi]
  double length = 0.0;
  double width = 0.0;
  int lane_id = 0;
};

// A vehicle's presence interval on the scenario grid: states[i] belongs to
// grid step first_step + i.
struct Track {
  int id = 0;
  int first_step = 0;
  std::vector<VehicleState> states;

  int last_step() const { return first_step + static_cast<int>(states.size()) - 1; }
  bool present(int step) const { return step >= first_step && step <= last_step(); }
  const VehicleState* at(int step) const {
    return present(step) ? &states[static_cast<std::size_t>(step - first_step)] : nullptr;
  }
};

enum class SignKind { kNoOvertakingStart, kNoOvertakingEnd };

std::string_view to_string(SignKind kind);
SignKind sign_kind_from_string(std::string_view text);

struct TrafficSign {
  SignKind kind = SignKind::kNoOvertakingStart;
  double s = 0.0;  // along the sign's driving direction
  int direction = 1;
};

struct EgoConfig {
  int direction = 1;
  double start_min = 150.0;  // metres upstream of the goal
  double start_max = 350.0;
  double start_speed = 15.0;
  double goal_s = 0.0;
  double length = 4.5;
  double width = 1.8;
};

struct Scenario {
  double timestep = 0.1;
  int steps = 0;  // grid size; step k is at time k * timestep
  std::vector<Track> tracks;  // sorted by id
  LaneNetwork lanes;
  std::vector<TrafficSign> signs;
  EgoConfig ego;

  const Track* find_track(int id) const;
  double duration() const { return (steps - 1) * timestep; }
};

// Throws DataError on a broken invariant (timestep, lane references, sign
// ordering, ego window outside the lane extent).
void validate(const Scenario& scenario);

// Kinematics of one vehicle in a direction's road frame.
struct RoadState {
  int id = 0;
  double s = 0.0;
  double d = 0.0;
  double vs = 0.0;
  double vd = 0.0;
  double as = 0.0;
  double ad = 0.0;
  double heading = 0.0;  // relative to the road direction
  double yaw_rate = 0.0;
  double length = 0.0;
  double width = 0.0;

  double speed() const;
  double front() const { return s + 0.5 * length; }
  double rear() const { return s - 0.5 * length; }
};

inline constexpr int kEgoId = -1;

RoadState to_road(const VehicleState& v, const FrenetFrame& frame);
VehicleState to_native(const RoadState& r, const FrenetFrame& frame, int lane_id);

// Vehicles present at step that drive in the frame's direction, by id.
std::vector<RoadState> road_states_at(const Scenario& scenario,
                                      const FrenetFrame& frame, int step);

// Linear re-interpolation of every track onto a grid with the given step.
Scenario resample(const Scenario& scenario, double timestep);

// Sorted (start, end) zones of no-overtaking signs for a direction. A start
// without a matching end runs to the road end.
struct NoOvertakingZone {
  double start = 0.0;
  double end = 0.0;
};
std::vector<NoOvertakingZone> no_overtaking_zones(const Scenario& scenario,
                                                  int direction);

}  // namespace rh
