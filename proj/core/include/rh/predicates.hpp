#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rh/scenario.hpp"
#include "rh/stl.hpp"

namespace rh {

struct PredicateParams {
  // keeps_safe_distance_prec
  double safe_delta = 0.3;    // reaction time, s
  double safe_a_min = -10.0;  // braking deceleration, m/s^2
  // no_overtaking_sign holds from detection_range metres before a start sign
  double detection_range = 50.0;
  // in_congestion / in_slow_moving_traffic / in_queue_of_vehicles
  double queue_gap = 20.0;
  int queue_min_vehicles = 3;
  double congestion_speed = 2.78;
  double slow_moving_speed = 8.33;
  double queue_speed = 11.11;
};

// d_safe(v_e, v_p) = v_e * delta + v_e^2 / (2|a_min|) - v_p^2 / (2|a_min|).
double safe_distance(double v_ego, double v_prec, const PredicateParams& p);

// Road-frame states of the replayed vehicles over a step range. Shared
// between world views that look at the same traffic.
class Traffic {
 public:
  Traffic(const Scenario& scenario, const FrenetFrame& frame, int first_step,
          int last_step);

  std::span<const RoadState> at(int step) const;
  const RoadState* find(int id, int step) const;
  // Every vehicle id seen in the range, ascending.
  const std::vector<int>& ids() const { return ids_; }

 private:
  int first_step_;
  std::vector<std::vector<RoadState>> steps_;
  std::vector<int> ids_;
};

// Ego states on the scenario grid: states[i] is at step start_step + i.
struct EgoTrack {
  int start_step = 0;
  std::vector<RoadState> states;
};

class WorldView {
 public:
  WorldView(const Scenario& scenario, EgoTrack ego);
  WorldView(std::shared_ptr<const Traffic> traffic, FrenetFrame frame,
            std::vector<NoOvertakingZone> zones, double timestep, EgoTrack ego);

  std::size_t size() const { return ego_.states.size(); }
  double timestep() const { return timestep_; }
  const FrenetFrame& frame() const { return frame_; }
  const std::vector<NoOvertakingZone>& zones() const { return zones_; }
  int step(std::size_t i) const { return ego_.start_step + static_cast<int>(i); }
  const RoadState& ego(std::size_t i) const { return ego_.states.at(i); }
  const EgoTrack& ego_track() const { return ego_; }
  std::span<const RoadState> others(std::size_t i) const { return traffic_->at(step(i)); }
  const RoadState* other(int id, std::size_t i) const { return traffic_->find(id, step(i)); }
  const std::vector<int>& other_ids() const { return traffic_->ids(); }

 private:
  std::shared_ptr<const Traffic> traffic_;
  FrenetFrame frame_;
  std::vector<NoOvertakingZone> zones_;
  double timestep_;
  EgoTrack ego_;
};

bool is_registered_predicate(std::string_view name);
std::span<const std::string_view> registered_predicates();

// Signed margin of a predicate at ego index i, positive iff it holds.
// Distances are in metres, speed comparisons in m/s. An absent other
// vehicle yields -stl::kCap. Throws LookupError for an unknown name and
// StateError when cut_in is asked for index 0 (it needs t-1).
double eval_predicate(std::string_view name, const WorldView& world,
                      std::optional<int> other_id, std::size_t i,
                      const PredicateParams& params);

// Traces for every leaf of a formula with "x0" bound to other_id.
stl::TraceSet predicate_traces(const stl::Formula& formula, const WorldView& world,
                               std::optional<int> other_id,
                               const PredicateParams& params);

}  // namespace rh
