#include "rh/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {

std::string_view to_string(SignKind kind) {
  switch (kind) {
    case SignKind::kNoOvertakingStart:
      return "no_overtaking_start";
    case SignKind::kNoOvertakingEnd:
      return "no_overtaking_end";
  }
  return "?";
}

SignKind sign_kind_from_string(std::string_view text) {
  if (text == "no_overtaking_start") return SignKind::kNoOvertakingStart;
  if (text == "no_overtaking_end") return SignKind::kNoOvertakingEnd;
  throw FormatError(fmt::format("unknown sign kind '{}'", text));
}

const Track* Scenario::find_track(int id) const {
  auto it = std::lower_bound(tracks.begin(), tracks.end(), id,
                             [](const Track& t, int v) { return t.id < v; });
  return it != tracks.end() && it->id == id ? &*it : nullptr;
}

void validate(const Scenario& scenario) {
  if (!(scenario.timestep > 0.0)) {
    throw DataError(fmt::format("timestep {} is not positive", scenario.timestep));
  }
  for (std::size_t i = 1; i < scenario.tracks.size(); ++i) {
    if (scenario.tracks[i].id <= scenario.tracks[i - 1].id) {
      throw DataError("tracks must be sorted by unique id");
    }
  }
  for (const Track& t : scenario.tracks) {
    if (t.first_step < 0 || t.last_step() >= scenario.steps) {
      throw DataError(fmt::format("track {} leaves the scenario grid", t.id));
    }
    for (const VehicleState& v : t.states) {
      if (!(v.length > 0.0) || !(v.width > 0.0)) {
        throw DataError(fmt::format("vehicle {} has non-positive extent", t.id));
      }
      if (scenario.lanes.find(v.lane_id) == nullptr) {
        throw DataError(fmt::format("vehicle {} references unknown lane {}",
                                    t.id, v.lane_id));
      }
    }
  }
  for (int dir : {1, -1}) {
    std::vector<TrafficSign> own;
    for (const TrafficSign& s : scenario.signs) {
      if (s.direction == dir) own.push_back(s);
    }
    std::sort(own.begin(), own.end(),
              [](const TrafficSign& a, const TrafficSign& b) { return a.s < b.s; });
    bool open = false;
    for (const TrafficSign& s : own) {
      if (s.kind == SignKind::kNoOvertakingStart) {
        open = true;
      } else {
        if (!open) {
          throw DataError(fmt::format("end sign at s={} has no start", s.s));
        }
        open = false;
      }
    }
  }
  const EgoConfig& ego = scenario.ego;
  if (!scenario.lanes.has_direction(ego.direction)) {
    throw DataError("ego direction has no lanes");
  }
  if (!(ego.start_min <= ego.start_max) || ego.start_min < 0.0 ||
      ego.goal_s - ego.start_max < -1e-9 ||
      ego.goal_s > scenario.lanes.length() + 1e-9) {
    throw DataError("ego start window lies outside the lane extent");
  }
}

double RoadState::speed() const { return std::hypot(vs, vd); }

RoadState to_road(const VehicleState& v, const FrenetFrame& frame) {
  RoadState r;
  r.id = v.id;
  const FrenetPoint p = frame.to_frenet_unchecked(v.position);
  const FrenetPoint vel = frame.velocity_to_frenet(v.velocity);
  const FrenetPoint acc = frame.velocity_to_frenet(v.acceleration);
  r.s = p.s;
  r.d = p.d;
  r.vs = vel.s;
  r.vd = vel.d;
  r.as = acc.s;
  r.ad = acc.d;
  r.heading = frame.heading_to_frenet(v.heading);
  r.length = v.length;
  r.width = v.width;
  const double v2 = r.vs * r.vs + r.vd * r.vd;
  r.yaw_rate = v2 > 1e-6 ? (r.vs * r.ad - r.vd * r.as) / v2 : 0.0;
  return r;
}

VehicleState to_native(const RoadState& r, const FrenetFrame& frame, int lane_id) {
  VehicleState v;
  v.id = r.id;
  v.position = frame.to_cartesian({r.s, r.d});
  v.velocity = frame.velocity_to_cartesian(r.vs, r.vd);
  v.acceleration = frame.velocity_to_cartesian(r.as, r.ad);
  v.heading = frame.heading_to_cartesian(r.heading);
  v.length = r.length;
  v.width = r.width;
  v.lane_id = lane_id;
  return v;
}

std::vector<RoadState> road_states_at(const Scenario& scenario,
                                      const FrenetFrame& frame, int step) {
  std::vector<RoadState> out;
  for (const Track& t : scenario.tracks) {
    const VehicleState* v = t.at(step);
    if (v == nullptr) continue;
    const Lane* lane = scenario.lanes.find(v->lane_id);
    if (lane == nullptr || lane->direction != frame.direction()) continue;
    out.push_back(to_road(*v, frame));
  }
  return out;
}

namespace {

VehicleState lerp(const VehicleState& a, const VehicleState& b, double w) {
  auto mix = [w](double x, double y) { return x + w * (y - x); };
  VehicleState v = a;
  v.position = {mix(a.position.x, b.position.x), mix(a.position.y, b.position.y)};
  v.velocity = {mix(a.velocity.x, b.velocity.x), mix(a.velocity.y, b.velocity.y)};
  v.acceleration = {mix(a.acceleration.x, b.acceleration.x),
                    mix(a.acceleration.y, b.acceleration.y)};
  v.heading = wrap_angle(a.heading + w * wrap_angle(b.heading - a.heading));
  v.lane_id = w < 0.5 ? a.lane_id : b.lane_id;
  return v;
}

}  // namespace

Scenario resample(const Scenario& scenario, double timestep) {
  if (!(timestep > 0.0)) throw RangeError("resample timestep must be positive");
  Scenario out = scenario;
  out.timestep = timestep;
  const double duration = scenario.duration();
  out.steps = static_cast<int>(std::floor(duration / timestep + 1e-9)) + 1;
  out.tracks.clear();
  for (const Track& t : scenario.tracks) {
    const double t0 = t.first_step * scenario.timestep;
    const double t1 = t.last_step() * scenario.timestep;
    const int k0 = static_cast<int>(std::ceil(t0 / timestep - 1e-9));
    const int k1 = static_cast<int>(std::floor(t1 / timestep + 1e-9));
    if (k1 < k0) continue;
    Track r;
    r.id = t.id;
    r.first_step = k0;
    for (int k = k0; k <= k1; ++k) {
      const double u = (k * timestep - t0) / scenario.timestep;
      const auto i = std::clamp(static_cast<std::size_t>(std::max(0.0, std::floor(u))),
                                std::size_t{0}, t.states.size() - 1);
      const std::size_t j = std::min(i + 1, t.states.size() - 1);
      const double w = j == i ? 0.0 : std::clamp(u - static_cast<double>(i), 0.0, 1.0);
      r.states.push_back(lerp(t.states[i], t.states[j], w));
    }
    out.tracks.push_back(std::move(r));
  }
  return out;
}

std::vector<NoOvertakingZone> no_overtaking_zones(const Scenario& scenario,
                                                  int direction) {
  std::vector<TrafficSign> own;
  for (const TrafficSign& s : scenario.signs) {
    if (s.direction == direction) own.push_back(s);
  }
  std::sort(own.begin(), own.end(),
            [](const TrafficSign& a, const TrafficSign& b) { return a.s < b.s; });
  std::vector<NoOvertakingZone> zones;
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (own[i].kind != SignKind::kNoOvertakingStart) continue;
    double end = scenario.lanes.length();
    for (std::size_t j = i + 1; j < own.size(); ++j) {
      if (own[j].kind == SignKind::kNoOvertakingEnd) {
        end = own[j].s;
        break;
      }
      if (own[j].kind == SignKind::kNoOvertakingStart) break;
    }
    zones.push_back({own[i].s, end});
  }
  return zones;
}

}  // namespace rh
