#include "rh/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {
namespace {

constexpr std::array<std::string_view, 11> kPredicates = {
    "in_same_lane",          "in_front_of",          "keeps_safe_distance_prec",
    "cut_in",                "left_of",              "drives_faster",
    "in_congestion",         "in_slow_moving_traffic", "in_queue_of_vehicles",
    "no_overtaking_sign",    "in_rightmost_lane"};

// Signed overlap of a vehicle's lateral extent with a lane interval.
double lane_occupancy(const RoadState& v, const FrenetFrame& f, int lane) {
  return std::min(v.d + 0.5 * v.width - f.lane_right(lane),
                  f.lane_left(lane) - (v.d - 0.5 * v.width));
}

double in_same_lane(const RoadState& a, const RoadState& b, const FrenetFrame& f) {
  double best = -INFINITY;
  for (int l = 0; l < f.lane_count(); ++l) {
    best = std::max(best, std::min(lane_occupancy(a, f, l), lane_occupancy(b, f, l)));
  }
  return best;
}

double in_front_of(const RoadState& ego, const RoadState& o) { return o.rear() - ego.front(); }

double left_of(const RoadState& o, const RoadState& ego, const FrenetFrame& f) {
  const int lane = f.lane_index(ego.d);
  double lateral = o.d - f.lane_left(lane);
  if (lane == f.lane_count() - 1) {
    // No lane further left; keep the margin negative and continuous.
    lateral = -0.5 * f.lane(lane).width - std::abs(lateral);
  }
  const double overlap = std::min(o.front(), ego.front()) - std::max(o.rear(), ego.rear());
  return std::min(lateral, overlap);
}

double queue_margin(const WorldView& w, const RoadState& x0, std::size_t i,
                    double speed_threshold, const PredicateParams& p) {
  const FrenetFrame& f = w.frame();
  const int lane = f.lane_index(x0.d);
  std::vector<const RoadState*> members;
  for (const RoadState& v : w.others(i)) {
    if (f.lane_index(v.d) == lane) members.push_back(&v);
  }
  std::sort(members.begin(), members.end(),
            [](const RoadState* a, const RoadState* b) { return a->s < b->s; });
  const int need = p.queue_min_vehicles;
  const int n = static_cast<int>(members.size());
  if (n < need) return -static_cast<double>(need - n);
  int pos = 0;
  while (members[static_cast<std::size_t>(pos)]->id != x0.id) ++pos;
  double best = -INFINITY;
  for (int start = std::max(0, pos - need + 1); start <= std::min(pos, n - need); ++start) {
    double gap = -INFINITY;
    double speed = -INFINITY;
    for (int k = start; k < start + need; ++k) {
      const RoadState& v = *members[static_cast<std::size_t>(k)];
      speed = std::max(speed, v.vs);
      if (k > start) {
        const RoadState& prev = *members[static_cast<std::size_t>(k - 1)];
        gap = std::max(gap, v.rear() - prev.front());
      }
    }
    best = std::max(best, std::min(p.queue_gap - gap, speed_threshold - speed));
  }
  return best;
}

}  // namespace

double safe_distance(double v_ego, double v_prec, const PredicateParams& p) {
  const double b = 2.0 * std::abs(p.safe_a_min);
  return v_ego * p.safe_delta + v_ego * v_ego / b - v_prec * v_prec / b;
}

Traffic::Traffic(const Scenario& scenario, const FrenetFrame& frame, int first_step,
                 int last_step)
    : first_step_(first_step) {
  for (int k = first_step; k <= last_step; ++k) {
    if (k >= 0 && k < scenario.steps) {
      steps_.push_back(road_states_at(scenario, frame, k));
    } else {
      steps_.emplace_back();
    }
    for (const RoadState& r : steps_.back()) ids_.push_back(r.id);
  }
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

std::span<const RoadState> Traffic::at(int step) const {
  const int k = step - first_step_;
  if (k < 0 || k >= static_cast<int>(steps_.size())) return {};
  return steps_[static_cast<std::size_t>(k)];
}

const RoadState* Traffic::find(int id, int step) const {
  const auto states = at(step);
  auto it = std::lower_bound(states.begin(), states.end(), id,
                             [](const RoadState& r, int v) { return r.id < v; });
  return it != states.end() && it->id == id ? &*it : nullptr;
}

WorldView::WorldView(const Scenario& scenario, EgoTrack ego)
    : traffic_(std::make_shared<Traffic>(
          scenario, scenario.lanes.frame(scenario.ego.direction), ego.start_step,
          ego.start_step + static_cast<int>(ego.states.size()) - 1)),
      frame_(scenario.lanes.frame(scenario.ego.direction)),
      zones_(no_overtaking_zones(scenario, scenario.ego.direction)),
      timestep_(scenario.timestep),
      ego_(std::move(ego)) {}

WorldView::WorldView(std::shared_ptr<const Traffic> traffic, FrenetFrame frame,
                     std::vector<NoOvertakingZone> zones, double timestep, EgoTrack ego)
    : traffic_(std::move(traffic)),
      frame_(std::move(frame)),
      zones_(std::move(zones)),
      timestep_(timestep),
      ego_(std::move(ego)) {}

bool is_registered_predicate(std::string_view name) {
  return std::find(kPredicates.begin(), kPredicates.end(), name) != kPredicates.end();
}

std::span<const std::string_view> registered_predicates() { return kPredicates; }

double eval_predicate(std::string_view name, const WorldView& w,
                      std::optional<int> other_id, std::size_t i,
                      const PredicateParams& p) {
  if (!is_registered_predicate(name)) {
    throw LookupError(fmt::format("unknown predicate '{}'", name));
  }
  if (i >= w.size()) throw StateError(fmt::format("index {} outside the ego track", i));
  const FrenetFrame& f = w.frame();
  const RoadState& ego = w.ego(i);

  if (name == "no_overtaking_sign") {
    double best = -stl::kCap;
    for (const NoOvertakingZone& z : w.zones()) {
      best = std::max(best, std::min(ego.s - (z.start - p.detection_range), z.end - ego.s));
    }
    return best;
  }
  if (name == "in_rightmost_lane") {
    return 0.5 * f.lane(0).width - std::abs(ego.d - f.lane(0).center);
  }

  if (!other_id) throw LookupError(fmt::format("predicate '{}' needs x0", name));
  const RoadState* o = w.other(*other_id, i);
  if (name == "cut_in") {
    if (i == 0) throw StateError("cut_in needs the previous timestep");
    const RoadState* prev = w.other(*other_id, i - 1);
    if (o == nullptr || prev == nullptr) return -stl::kCap;
    const int lane = f.lane_index(ego.d);
    return std::min({lane_occupancy(*o, f, lane), -lane_occupancy(*prev, f, lane), o->s - ego.s});
  }
  if (o == nullptr) return -stl::kCap;
  if (name == "in_same_lane") return in_same_lane(ego, *o, f);
  if (name == "in_front_of") return in_front_of(ego, *o);
  if (name == "keeps_safe_distance_prec") {
    return in_front_of(ego, *o) - safe_distance(ego.vs, o->vs, p);
  }
  if (name == "left_of") return left_of(*o, ego, f);
  if (name == "drives_faster") return ego.vs - o->vs;
  if (name == "in_congestion") return queue_margin(w, *o, i, p.congestion_speed, p);
  if (name == "in_slow_moving_traffic") return queue_margin(w, *o, i, p.slow_moving_speed, p);
  return queue_margin(w, *o, i, p.queue_speed, p);  // in_queue_of_vehicles
}

stl::TraceSet predicate_traces(const stl::Formula& formula, const WorldView& w,
                               std::optional<int> other_id, const PredicateParams& p) {
  stl::TraceSet traces(w.timestep(), w.size());
  for (const stl::Formula* leaf : stl::leaves(formula)) {
    stl::Signal s;
    s.values.resize(w.size());
    s.valid.assign(w.size(), 1);
    const bool uses_other =
        std::find(leaf->args.begin(), leaf->args.end(), "x0") != leaf->args.end();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (leaf->name == "cut_in" && i == 0) {
        s.valid[i] = 0;
        s.values[i] = 0.0;
        continue;
      }
      s.values[i] = eval_predicate(leaf->name, w, uses_other ? other_id : std::nullopt, i, p);
    }
    traces.set(leaf->key, std::move(s));
  }
  return traces;
}

}  // namespace rh
