#include "rh/planner.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "rh/collision.hpp"
#include "rh/error.hpp"

namespace rh {

std::string_view to_string(Infeasibility v) {
  switch (v) {
    case Infeasibility::kNone:
      return "feasible";
    case Infeasibility::kAcceleration:
      return "acceleration";
    case Infeasibility::kCurvature:
      return "curvature";
    case Infeasibility::kVelocity:
      return "velocity";
    case Infeasibility::kOffRoad:
      return "off-road";
  }
  return "?";
}

void PlannerParams::validate() const {
  if (!(timestep > 0.0 && horizon > 0.0 && replan_period > 0.0)) {
    throw ConfigError("planner timestep, horizon and replan period must be positive");
  }
  if (replan_period > horizon + 1e-12) throw ConfigError("replan period exceeds the horizon");
  if (!(a_max > 0.0 && curvature_max > 0.0 && v_max > 0.0 && v_min >= 0.0 && v_min < v_max)) {
    throw ConfigError("planner limits must be positive");
  }
  if (clearance_longitudinal < 0.0 || clearance_lateral < 0.0) {
    throw ConfigError("clearance must be non-negative");
  }
  if (coarse_speed_offsets.empty() || fine_speed_offsets.empty()) {
    throw ConfigError("target speed offsets must not be empty");
  }
  if (cost_stride < 1) throw ConfigError("cost stride must be >= 1");
}

double CostWeights::rule(RuleId r) const {
  switch (r) {
    case RuleId::kG1:
      return rule_g1;
    case RuleId::kI6:
      return rule_i6;
    case RuleId::kI2:
      return rule_i2;
  }
  return 0.0;
}

std::vector<double> lateral_targets(const FrenetFrame& frame, int subdivisions) {
  std::vector<double> out;
  for (int l = 0; l < frame.lane_count(); ++l) {
    const double c = frame.lane(l).center;
    out.push_back(c);
    if (l + 1 == frame.lane_count()) break;
    const double next = frame.lane(l + 1).center;
    for (int k = 1; k < subdivisions; ++k) {
      out.push_back(c + (next - c) * static_cast<double>(k) / subdivisions);
    }
  }
  return out;
}

std::vector<Candidate> sample_candidates(const FrenetState& start,
                                         std::span<const double> d_targets,
                                         std::span<const double> v_targets,
                                         const PlannerParams& params,
                                         const FrenetFrame& frame) {
  if (d_targets.empty() || v_targets.empty()) throw PlannerError("empty candidate set");
  const int n = static_cast<int>(std::lround(params.horizon / params.timestep));
  std::vector<Candidate> out;
  out.reserve(d_targets.size() * v_targets.size());
  for (double dt : d_targets) {
    for (double vt : v_targets) {
      Candidate c;
      c.index = static_cast<int>(out.size());
      c.d_target = dt;
      c.v_target = vt;
      c.horizon = params.horizon;
      c.lateral = quintic_between(start.d, start.d_d, start.d_dd, dt, 0.0, 0.0, params.horizon);
      c.longitudinal = quartic_between(start.s, start.s_d, start.s_dd, vt, 0.0, params.horizon);
      c.states.resize(static_cast<std::size_t>(n + 1));
      for (int k = 0; k <= n; ++k) {
        const double t = k == n ? params.horizon : k * params.timestep;
        TrajectoryPoint& p = c.states[static_cast<std::size_t>(k)];
        p.t = t;
        p.f = {c.longitudinal.value(t), c.longitudinal.d1(t), c.longitudinal.d2(t),
               c.lateral.value(t),      c.lateral.d1(t),      c.lateral.d2(t)};
        const double v2 = p.f.s_d * p.f.s_d + p.f.d_d * p.f.d_d;
        p.v = std::sqrt(v2);
        p.a = std::hypot(p.f.s_dd, p.f.d_dd);
        p.heading = std::atan2(p.f.d_d, p.f.s_d);
        const double cross = p.f.s_d * p.f.d_dd - p.f.d_d * p.f.s_dd;
        p.curvature = p.v > 1e-6 ? cross / (v2 * p.v) : 0.0;
        p.yaw_rate = v2 > 1e-12 ? cross / v2 : 0.0;
        p.xy = frame.to_cartesian({p.f.s, p.f.d});
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

Infeasibility check_feasibility(const Candidate& c, const PlannerParams& params,
                                const FrenetFrame& frame, double ego_width) {
  for (const auto& p : c.states) {
    if (p.a > params.a_max) return Infeasibility::kAcceleration;
  }
  for (const auto& p : c.states) {
    if (std::abs(p.curvature) > params.curvature_max) return Infeasibility::kCurvature;
  }
  for (const auto& p : c.states) {
    if (p.f.s_d < params.v_min || p.v > params.v_max) return Infeasibility::kVelocity;
  }
  const double lo = frame.road_right() + 0.5 * ego_width;
  const double hi = frame.road_left() - 0.5 * ego_width;
  for (const auto& p : c.states) {
    if (p.f.d < lo - 1e-9 || p.f.d > hi + 1e-9) return Infeasibility::kOffRoad;
  }
  return Infeasibility::kNone;
}

RoadState road_state_of(const TrajectoryPoint& p, double length, double width) {
  RoadState r;
  r.id = kEgoId;
  r.s = p.f.s;
  r.d = p.f.d;
  r.vs = p.f.s_d;
  r.vd = p.f.d_d;
  r.as = p.f.s_dd;
  r.ad = p.f.d_dd;
  r.heading = p.heading;
  r.yaw_rate = p.yaw_rate;
  r.length = length;
  r.width = width;
  return r;
}

bool check_collision(const Candidate& c, const Traffic& traffic, int start_step,
                     double length, double width, double clearance_longitudinal,
                     double clearance_lateral) {
  for (std::size_t k = 0; k < c.states.size(); ++k) {
    const RoadState ego = road_state_of(c.states[k], length, width);
    for (const RoadState& o : traffic.at(start_step + static_cast<int>(k))) {
      if (!keeps_clearance(ego, o, clearance_longitudinal, clearance_lateral)) return true;
    }
  }
  return false;
}

void evaluate_cost(Candidate& c, const PlanContext& ctx, const CostWeights& w,
                   const PlannerParams& params) {
  if (w.value != 0.0 && ctx.critic == nullptr) {
    throw ConfigError("value cost weight is non-zero but no critic is attached");
  }
  std::vector<std::size_t> strided;
  for (std::size_t k = static_cast<std::size_t>(params.cost_stride); k < c.states.size();
       k += static_cast<std::size_t>(params.cost_stride)) {
    strided.push_back(k);
  }
  if (strided.empty() || strided.back() != c.states.size() - 1) {
    strided.push_back(c.states.size() - 1);
  }
  const double m = static_cast<double>(strided.size());
  c.costs.clear();

  double value = 0.0;
  if (w.value != 0.0) {
    for (std::size_t k : strided) {
      const RoadState r = road_state_of(c.states[k], ctx.ego_length, ctx.ego_width);
      value -= ctx.critic->value(r, ctx.step + static_cast<int>(k));
    }
    value /= m;
  }
  c.costs["value"] = value;

  const bool any_rule = w.rule_g1 != 0.0 || w.rule_i6 != 0.0 || w.rule_i2 != 0.0;
  std::array<double, 3> rule_cost{};
  if (any_rule) {
    EgoTrack track;
    const std::size_t h = std::max<std::size_t>(ctx.history.size(), 1);
    track.start_step = ctx.step - static_cast<int>(h) + 1;
    track.states.assign(ctx.history.begin(), ctx.history.end());
    if (track.states.empty()) {
      track.states.push_back(road_state_of(c.states[0], ctx.ego_length, ctx.ego_width));
    }
    for (std::size_t k = 1; k < c.states.size(); ++k) {
      track.states.push_back(road_state_of(c.states[k], ctx.ego_length, ctx.ego_width));
    }
    WorldView world(ctx.traffic, ctx.frame, ctx.zones, ctx.timestep, std::move(track));
    std::vector<std::size_t> idx;
    for (std::size_t k : strided) idx.push_back(h - 1 + k);
    for (RuleId rule : kRules) {
      if (w.rule(rule) == 0.0) continue;
      const auto series = rule_series(rule, world, ctx.rules, idx);
      double acc = 0.0;
      for (const auto& v : series) {
        if (v) acc -= clip_robustness(*v);
      }
      rule_cost[static_cast<std::size_t>(rule)] = acc / m;
    }
  }
  c.costs["rule_g1"] = rule_cost[0];
  c.costs["rule_i6"] = rule_cost[1];
  c.costs["rule_i2"] = rule_cost[2];

  c.costs["jerk"] = squared_jerk_integral(c.lateral, c.horizon) +
                    squared_jerk_integral(c.longitudinal, c.horizon);
  double speed = 0.0;
  for (std::size_t k : strided) {
    const double e = c.states[k].f.s_d - w.desired_speed;
    speed += e * e;
  }
  c.costs["speed"] = speed / m;
  const double d_end = c.states.back().f.d;
  const double centre = ctx.frame.lane(ctx.frame.lane_index(d_end)).center;
  c.costs["lateral"] = (d_end - centre) * (d_end - centre);

  c.total = w.value * c.costs["value"] + w.rule_g1 * rule_cost[0] + w.rule_i6 * rule_cost[1] +
            w.rule_i2 * rule_cost[2] + w.jerk * c.costs["jerk"] + w.speed * c.costs["speed"] +
            w.lateral * c.costs["lateral"];
}

const Candidate* select_best(std::span<const Candidate> candidates) {
  const Candidate* best = nullptr;
  for (const Candidate& c : candidates) {
    if (best == nullptr) {
      best = &c;
      continue;
    }
    if (c.total != best->total) {
      if (c.total < best->total) best = &c;
      continue;
    }
    const double a = std::abs(c.d_target);
    const double b = std::abs(best->d_target);
    if (a != b) {
      if (a < b) best = &c;
      continue;
    }
    if (c.index < best->index) best = &c;
  }
  return best;
}

PlanResult plan(const FrenetState& start, const PlanContext& ctx, const CostWeights& weights,
                const PlannerParams& params, bool keep_candidates) {
  params.validate();
  if (!ctx.traffic) throw ConfigError("plan context has no traffic");
  PlanResult result;
  for (int level = 0; level < 2; ++level) {
    const auto d_targets = lateral_targets(ctx.frame, level == 0 ? 2 : 4);
    std::vector<double> v_targets;
    for (double off : level == 0 ? params.coarse_speed_offsets : params.fine_speed_offsets) {
      v_targets.push_back(start.s_d + off);
    }
    auto candidates = sample_candidates(start, d_targets, v_targets, params, ctx.frame);
    result.sampled += static_cast<int>(candidates.size());
    std::vector<Candidate> survivors;
    for (Candidate& c : candidates) {
      c.infeasible = check_feasibility(c, params, ctx.frame, ctx.ego_width);
      if (c.infeasible != Infeasibility::kNone) continue;
      ++result.feasible;
      c.collides = check_collision(c, *ctx.traffic, ctx.step, ctx.ego_length, ctx.ego_width,
                                   params.clearance_longitudinal, params.clearance_lateral);
      if (c.collides) continue;
      ++result.collision_free;
      evaluate_cost(c, ctx, weights, params);
      survivors.push_back(c);
    }
    if (keep_candidates) {
      for (Candidate& c : candidates) result.evaluated.push_back(std::move(c));
    }
    if (const Candidate* best = select_best(survivors)) {
      result.best = *best;
      result.level = level;
      return result;
    }
  }
  throw PlannerError(fmt::format("no feasible collision-free candidate at step {}", ctx.step));
}

std::string candidates_csv(std::span<const Candidate> candidates) {
  std::string out =
      "id,d_target,v_target,verdict,collides,value,rule_g1,rule_i6,rule_i2,jerk,speed,lateral,"
      "total\n";
  auto cost = [](const Candidate& c, const char* k) {
    auto it = c.costs.find(k);
    return it == c.costs.end() ? 0.0 : it->second;
  };
  for (const Candidate& c : candidates) {
    out += fmt::format("{},{:.4f},{:.4f},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                       c.index, c.d_target, c.v_target, to_string(c.infeasible),
                       c.collides ? 1 : 0, cost(c, "value"), cost(c, "rule_g1"),
                       cost(c, "rule_i6"), cost(c, "rule_i2"), cost(c, "jerk"), cost(c, "speed"),
                       cost(c, "lateral"), c.total);
  }
  return out;
}

}  // namespace rh
