#include "rh/environment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "rh/collision.hpp"
#include "rh/error.hpp"

namespace rh {

int EnvParams::substeps() const {
  return std::max(1, static_cast<int>(std::lround(planner.replan_period / planner.timestep)));
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kNone:
      return "running";
    case Termination::kGoal:
      return "goal";
    case Termination::kOffRoad:
      return "off-road";
    case Termination::kCollision:
      return "collision";
    case Termination::kScenarioEnd:
      return "scenario-end";
    case Termination::kPlannerFailure:
      return "planner-failure";
  }
  return "?";
}

ScenarioContext::ScenarioContext(const Scenario& s)
    : scenario(&s),
      traffic(std::make_shared<Traffic>(s, s.lanes.frame(s.ego.direction), 0, s.steps - 1)),
      frame(s.lanes.frame(s.ego.direction)),
      zones(no_overtaking_zones(s, s.ego.direction)) {}

GraphCritic::GraphCritic(const ValueNet& net, const ScenarioContext& ctx, GraphParams params)
    : net_(net), ctx_(ctx), params_(params) {}

TrafficGraph GraphCritic::graph(const RoadState& ego, int step) const {
  return build_graph(ego, ctx_.traffic->at(step), ctx_.frame, ctx_.zones,
                     ctx_.scenario->ego.goal_s, params_);
}

double GraphCritic::value(const RoadState& ego, int step) const {
  return (net_.forward(graph(ego, step)) - net_.output_offset()) / net_.output_scale();
}

RoadState make_ego_state(const FrenetState& f, double length, double width) {
  TrajectoryPoint p;
  p.f = f;
  const double v2 = f.s_d * f.s_d + f.d_d * f.d_d;
  p.heading = std::atan2(f.d_d, f.s_d);
  p.yaw_rate = v2 > 1e-12 ? (f.s_d * f.d_dd - f.d_d * f.s_dd) / v2 : 0.0;
  return road_state_of(p, length, width);
}

Termination classify_state(const RoadState& ego, std::span<const RoadState> others,
                           const FrenetFrame& frame, double goal_s, int step, int steps) {
  for (const RoadState& o : others) {
    if (!keeps_clearance(ego, o, 0.0, 0.0)) return Termination::kCollision;
  }
  const double lo = frame.road_right() + 0.5 * ego.width;
  const double hi = frame.road_left() - 0.5 * ego.width;
  if (ego.d < lo - 1e-9 || ego.d > hi + 1e-9) return Termination::kOffRoad;
  if (ego.s >= goal_s) return Termination::kGoal;
  if (step >= steps - 1) return Termination::kScenarioEnd;
  return Termination::kNone;
}

std::size_t rule_history_length(const RuleParams& rules, double timestep) {
  return static_cast<std::size_t>(std::ceil(rules.cut_in_window / timestep + 1e-9)) + 2;
}

std::optional<EpisodeStart> sample_start(const ScenarioContext& ctx, const EnvParams& p,
                                         Rng& rng) {
  const Scenario& sc = *ctx.scenario;
  for (int attempt = 0; attempt < p.start_attempts; ++attempt) {
    EpisodeStart st;
    st.s = sc.ego.goal_s - uniform(rng, p.start_min, p.start_max);
    st.lane = p.random_lane ? static_cast<int>(uniform_index(rng, static_cast<std::size_t>(ctx.frame.lane_count()))) : 0;
    st.speed = p.start_speed;
    st.step = 0;
    const FrenetState f{st.s, st.speed, 0.0, ctx.frame.lane(st.lane).center, 0.0, 0.0};
    const RoadState ego = make_ego_state(f, sc.ego.length, sc.ego.width);
    bool clear = true;
    for (const RoadState& o : ctx.traffic->at(st.step)) {
      if (!keeps_clearance(ego, o, p.planner.clearance_longitudinal, p.planner.clearance_lateral)) {
        clear = false;
        break;
      }
    }
    if (clear) return st;
  }
  return std::nullopt;
}

Episode::Episode(const ScenarioContext& ctx, RuleId phase, const EnvParams& params,
                 EpisodeStart start, int id)
    : ctx_(ctx),
      phase_(phase),
      params_(params),
      start_(start),
      id_(id),
      route_length_(ctx.scenario->ego.goal_s - start.s),
      step_(start.step),
      state_{start.s, start.speed, 0.0, ctx.frame.lane(start.lane).center, 0.0, 0.0} {
  if (!(route_length_ > 0.0)) throw RangeError("episode starts at or beyond the goal");
  history_.push_back(make_ego_state(state_, ctx.scenario->ego.length, ctx.scenario->ego.width));
}

TrafficGraph Episode::graph_now() const {
  return build_graph(history_.back(), ctx_.traffic->at(step_), ctx_.frame, ctx_.zones,
                     ctx_.scenario->ego.goal_s, params_.graph);
}

std::vector<Transition> Episode::advance(const StateValue* critic, int max_substeps) {
  std::vector<Transition> out;
  if (finished()) return out;
  const Scenario& sc = *ctx_.scenario;
  const std::size_t keep = rule_history_length(params_.rules, sc.timestep);

  PlanContext pc{ctx_.traffic, ctx_.frame, ctx_.zones, sc.timestep, step_, {}, sc.ego.length,
                 sc.ego.width, params_.rules, critic};
  const std::size_t from = history_.size() > keep ? history_.size() - keep : 0;
  pc.history.assign(history_.begin() + static_cast<std::ptrdiff_t>(from), history_.end());

  PlanResult planned;
  try {
    planned = plan(state_, pc, params_.weights, params_.planner, debug_ != nullptr);
  } catch (const PlannerError&) {
    termination_ = Termination::kPlannerFailure;
    return out;
  }
  if (debug_ != nullptr) {
    const std::string table = candidates_csv(planned.evaluated);
    std::size_t pos = table.find('\n') + 1;
    if (debug_->empty()) *debug_ = "step," + table.substr(0, pos);
    while (pos < table.size()) {
      const std::size_t end = table.find('\n', pos);
      *debug_ += fmt::format("{},{}\n", step_, table.substr(pos, end - pos));
      pos = end + 1;
    }
  }

  const int n = std::min({max_substeps, params_.substeps(),
                          static_cast<int>(planned.best.states.size()) - 1});
  for (int k = 1; k <= n; ++k) {
    Transition tr;
    tr.graph = graph_now();
    tr.episode = id_;
    const double s_prev = state_.s;
    state_ = planned.best.states[static_cast<std::size_t>(k)].f;
    ++step_;
    history_.push_back(make_ego_state(state_, sc.ego.length, sc.ego.width));
    const RoadState& ego = history_.back();
    tr.ego = ego;
    tr.step = step_;

    EgoTrack tail;
    const std::size_t f = history_.size() > keep ? history_.size() - keep : 0;
    tail.start_step = step_ - static_cast<int>(history_.size() - f) + 1;
    tail.states.assign(history_.begin() + static_cast<std::ptrdiff_t>(f), history_.end());
    const std::size_t last = tail.states.size() - 1;
    WorldView world(ctx_.traffic, ctx_.frame, ctx_.zones, sc.timestep, std::move(tail));
    const RuleReward rr = reward_rule(phase_, world, last, params_.rules, params_.reward);
    const double s0 = std::clamp(s_prev - start_.s, 0.0, route_length_);
    const double s1 = std::clamp(ego.s - start_.s, 0.0, route_length_);
    tr.reward_rule = rr.value;
    tr.rule_invalid = rr.invalid;
    tr.reward_progression = reward_progression(s0, s1, route_length_, params_.reward);
    tr.reward = tr.reward_rule + tr.reward_progression;

    termination_ = classify_state(ego, ctx_.traffic->at(step_), ctx_.frame, sc.ego.goal_s, step_,
                                  sc.steps);
    tr.done = finished();
    tr.reason = termination_;
    out.push_back(std::move(tr));
    if (finished()) break;
  }
  return out;
}

}  // namespace rh
