#include "rh/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "rh/error.hpp"
#include "rh/random.hpp"

namespace rh {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise constant-acceleration longitudinal profile.
struct Profile {
  double s0 = 0.0;
  double v0 = 0.0;
  double brake_start = kInf;
  double decel = 0.0;
  double v_final = 0.0;

  double brake_end() const {
    return std::isfinite(brake_start) ? brake_start + (v0 - v_final) / decel : kInf;
  }
  double speed(double t) const {
    if (t <= brake_start) return v0;
    if (t >= brake_end()) return v_final;
    return v0 - decel * (t - brake_start);
  }
  double accel(double t) const {
    return t > brake_start && t < brake_end() ? -decel : 0.0;
  }
  double position(double t) const {
    if (t <= brake_start) return s0 + v0 * t;
    const double tb = std::min(t, brake_end()) - brake_start;
    double s = s0 + v0 * brake_start + v0 * tb - 0.5 * decel * tb * tb;
    if (t > brake_end()) s += v_final * (t - brake_end());
    return s;
  }
};

// Quintic rest-to-rest blend from 0 to 1 over [0, 1].
double blend(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }
double blend_d(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double blend_dd(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }

struct LaneChange {
  double start = kInf;
  int from = 0;
  int to = 0;
};

}  // namespace

Scenario generate_synthetic_scenario(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.lanes < 1) throw GenerationError("lane count must be at least 1");
  if (!(spec.duration > 0.0)) throw GenerationError("duration must be positive");
  if (!(spec.timestep > 0.0)) throw GenerationError("timestep must be positive");
  if (spec.vehicles < 0) throw GenerationError("vehicle count must be non-negative");
  if (!(spec.speed_min >= 0.0 && spec.speed_max >= spec.speed_min)) {
    throw GenerationError("speed range is empty or negative");
  }
  if (!(spec.lane_width > spec.vehicle_width)) {
    throw GenerationError("vehicles do not fit the lane width");
  }

  Rng rng = make_rng(seed, "synth");
  const double slot = spec.vehicle_length + spec.min_gap;
  const double span = spec.road_length + spec.spawn_upstream;
  const int per_lane = static_cast<int>(std::floor(span / slot));
  const int capacity = per_lane * spec.lanes;
  if (spec.vehicles > capacity) {
    throw GenerationError(fmt::format(
        "{} vehicles do not fit: {} lanes hold {} at a {} m minimum gap",
        spec.vehicles, spec.lanes, capacity, spec.min_gap));
  }

  std::vector<std::size_t> slots(static_cast<std::size_t>(capacity));
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  shuffle(rng, slots);
  slots.resize(static_cast<std::size_t>(spec.vehicles));
  std::sort(slots.begin(), slots.end());

  struct Vehicle {
    int lane;
    Profile profile;
    LaneChange change;
  };
  std::vector<Vehicle> vehicles;
  for (std::size_t k : slots) {
    const int lane = static_cast<int>(k) / per_lane;
    const int pos = static_cast<int>(k) % per_lane;
    Vehicle v;
    v.lane = lane;
    v.profile.s0 = -spec.spawn_upstream + pos * slot + 0.5 * spec.vehicle_length +
                   uniform(rng, 0.0, 0.5 * spec.min_gap);
    v.profile.v0 = uniform(rng, spec.speed_min, spec.speed_max);
    vehicles.push_back(v);
  }

  // Followers never outrun their leader: process each lane front to back.
  std::vector<std::vector<std::size_t>> by_lane(static_cast<std::size_t>(spec.lanes));
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    by_lane[static_cast<std::size_t>(vehicles[i].lane)].push_back(i);
  }
  for (auto& lane : by_lane) {
    std::sort(lane.begin(), lane.end(), [&](std::size_t a, std::size_t b) {
      return vehicles[a].profile.s0 > vehicles[b].profile.s0;
    });
    for (std::size_t j = 1; j < lane.size(); ++j) {
      Profile& f = vehicles[lane[j]].profile;
      f.v0 = std::min(f.v0, vehicles[lane[j - 1]].profile.v0);
    }
  }

  if (spec.braking) {
    const BrakingEvent& b = *spec.braking;
    if (!(b.deceleration > 0.0)) throw GenerationError("braking deceleration must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (lane, index in lane)
    for (std::size_t l = 0; l < by_lane.size(); ++l) {
      for (std::size_t j = 0; j + 1 < by_lane[l].size(); ++j) candidates.push_back({l, j});
    }
    if (candidates.empty()) {
      throw GenerationError("braking event needs a lane with at least two vehicles");
    }
    const auto [l, j] = candidates[uniform_index(rng, candidates.size())];
    const auto& lane = by_lane[l];
    for (std::size_t m = j; m < lane.size(); ++m) {
      Profile& p = vehicles[lane[m]].profile;
      const double target = std::min(p.v0, b.final_speed);
      if (p.v0 <= target) continue;
      p.brake_start = b.time + static_cast<double>(m - j) * b.reaction_delay;
      p.decel = b.deceleration;
      p.v_final = target;
    }
  }

  if (spec.lane_changes > 0) {
    if (spec.lanes < 2) throw GenerationError("lane changes need at least two lanes");
    const double latest = spec.duration - spec.lane_change_duration;
    if (latest <= 0.0) throw GenerationError("duration too short for lane changes");
    std::vector<std::size_t> order(vehicles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(rng, order);
    const std::size_t n = std::min<std::size_t>(order.size(),
                                                static_cast<std::size_t>(spec.lane_changes));
    for (std::size_t k = 0; k < n; ++k) {
      Vehicle& v = vehicles[order[k]];
      int to = v.lane + (uniform01(rng) < 0.5 ? -1 : 1);
      if (to < 0) to = 1;
      if (to >= spec.lanes) to = spec.lanes - 2;
      v.change = {uniform(rng, 0.0, latest), v.lane, to};
    }
  }

  Scenario sc;
  sc.timestep = spec.timestep;
  sc.steps = static_cast<int>(std::floor(spec.duration / spec.timestep + 1e-9)) + 1;
  std::vector<Lane> lanes;
  for (int i = 0; i < spec.lanes; ++i) {
    lanes.push_back({i + 1, i * spec.lane_width, spec.lane_width, 1});
  }
  sc.lanes = LaneNetwork(std::move(lanes), 0.0, spec.road_length, false);
  sc.ego.goal_s = spec.road_length;
  sc.ego.start_max = std::min(sc.ego.start_max, spec.road_length);
  sc.ego.start_min = std::min(sc.ego.start_min, sc.ego.start_max);

  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const Vehicle& v = vehicles[i];
    Track t;
    t.id = static_cast<int>(i) + 1;
    t.first_step = 0;
    for (int k = 0; k < sc.steps; ++k) {
      const double time = k * spec.timestep;
      VehicleState s;
      s.id = t.id;
      double y = v.lane * spec.lane_width;
      double vy = 0.0, ay = 0.0;
      int lane = v.lane;
      if (time > v.change.start) {
        const double u = std::min(1.0, (time - v.change.start) / spec.lane_change_duration);
        const double dy = (v.change.to - v.change.from) * spec.lane_width;
        const double tl = spec.lane_change_duration;
        y = v.change.from * spec.lane_width + dy * blend(u);
        vy = u < 1.0 ? dy * blend_d(u) / tl : 0.0;
        ay = u < 1.0 ? dy * blend_dd(u) / (tl * tl) : 0.0;
        lane = u < 0.5 ? v.change.from : v.change.to;
      }
      const double vx = v.profile.speed(time);
      s.position = {v.profile.position(time), y};
      s.velocity = {vx, vy};
      s.acceleration = {v.profile.accel(time), ay};
      s.heading = std::atan2(vy, vx);
      s.length = spec.vehicle_length;
      s.width = spec.vehicle_width;
      s.lane_id = lane + 1;
      t.states.push_back(s);
    }
    sc.tracks.push_back(std::move(t));
  }
  validate(sc);
  return sc;
}

Scenario insert_no_overtaking_sign(Scenario scenario, std::uint64_t seed) {
  constexpr double kLo = 100.0;
  constexpr double kHi = 350.0;
  if (scenario.lanes.length() < kHi) {
    throw RangeError(fmt::format("lane extent {} m does not cover [{}, {}] m",
                                 scenario.lanes.length(), kLo, kHi));
  }
  Rng rng = make_rng(seed, "sign");
  scenario.signs.push_back(
      {SignKind::kNoOvertakingStart, uniform(rng, kLo, kHi), scenario.ego.direction});
  return scenario;
}

std::vector<Scenario> generate_scenario_set(const SyntheticSpec& spec, int count,
                                            std::uint64_t seed, bool with_sign) {
  if (count < 0) throw GenerationError("scenario count must be non-negative");
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, fmt::format("scenario/{}", i));
    Scenario sc = generate_synthetic_scenario(spec, s);
    if (with_sign) sc = insert_no_overtaking_sign(std::move(sc), s);
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace rh
