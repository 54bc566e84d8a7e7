#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rh/graph.hpp"
#include "rh/planner.hpp"
#include "rh/random.hpp"
#include "rh/rewards.hpp"
#include "rh/value_net.hpp"

namespace rh {

struct EnvParams {
  PlannerParams planner;
  CostWeights weights;
  RuleParams rules;
  RewardParams reward;
  GraphParams graph;
  double start_min = 150.0;  // metres before the goal
  double start_max = 350.0;
  double start_speed = 15.0;
  bool random_lane = true;
  int start_attempts = 50;

  int substeps() const;  // replan period in grid steps
};

enum class Termination { kNone, kGoal, kOffRoad, kCollision, kScenarioEnd, kPlannerFailure };
std::string_view to_string(Termination t);

// Road-frame view of one scenario shared by every episode on it.
struct ScenarioContext {
  const Scenario* scenario = nullptr;
  std::shared_ptr<const Traffic> traffic;
  FrenetFrame frame;
  std::vector<NoOvertakingZone> zones;

  explicit ScenarioContext(const Scenario& s);
};

// Planner-facing critic; values are in standardised return units (output
// affine removed) so the value weight is commensurate with clipped rule terms.
class GraphCritic : public StateValue {
 public:
  GraphCritic(const ValueNet& net, const ScenarioContext& ctx, GraphParams params = {});
  TrafficGraph graph(const RoadState& ego, int step) const;
  double value(const RoadState& ego, int step) const override;

 private:
  const ValueNet& net_;
  const ScenarioContext& ctx_;
  GraphParams params_;
};

struct EpisodeStart {
  double s = 0.0;
  int lane = 0;
  double speed = 15.0;
  int step = 0;
};

// Start position goal - U[start_min, start_max] in a uniformly drawn lane (the
// rightmost one unless random_lane), redrawn while it violates the
// planner clearance. nullopt when no attempt succeeds.
std::optional<EpisodeStart> sample_start(const ScenarioContext& ctx, const EnvParams& params,
                                         Rng& rng);

struct Transition {
  TrafficGraph graph;  // state the step starts from
  RoadState ego;       // state it reaches
  int step = 0;        // grid step reached
  double reward = 0.0;
  double reward_rule = 0.0;
  double reward_progression = 0.0;
  bool rule_invalid = false;
  bool done = false;
  Termination reason = Termination::kNone;
  int episode = 0;
};

class Episode {
 public:
  Episode(const ScenarioContext& ctx, RuleId phase, const EnvParams& params, EpisodeStart start,
          int id);

  bool finished() const { return termination_ != Termination::kNone; }
  Termination termination() const { return termination_; }
  int id() const { return id_; }
  int current_step() const { return step_; }
  const FrenetState& current_state() const { return state_; }
  const std::vector<RoadState>& history() const { return history_; }
  const EpisodeStart& start() const { return start_; }
  double route_length() const { return route_length_; }

  // Replans from the current state and executes up to max_substeps (never
  // more than one replan period) of the chosen trajectory. A planner failure
  // finishes the episode without emitting a transition.
  std::vector<Transition> advance(const StateValue* critic, int max_substeps);

  TrafficGraph graph_now() const;

  // When set, every plan appends its candidate table (prefixed with the
  // grid step) to the sink.
  void set_debug_sink(std::string* sink) { debug_ = sink; }

 private:
  const ScenarioContext& ctx_;
  RuleId phase_;
  const EnvParams& params_;
  EpisodeStart start_;
  int id_;
  double route_length_;
  int step_;
  FrenetState state_;
  std::vector<RoadState> history_;
  Termination termination_ = Termination::kNone;
  std::string* debug_ = nullptr;
};

RoadState make_ego_state(const FrenetState& f, double length, double width);

// Termination of a reached ego state at grid step `step`, checked in the
// order collision (actual box overlap), off-road, goal, scenario end.
Termination classify_state(const RoadState& ego, std::span<const RoadState> others,
                           const FrenetFrame& frame, double goal_s, int step, int steps);

// History tail long enough for every rule's temporal window.
std::size_t rule_history_length(const RuleParams& rules, double timestep);

}  // namespace rh
