#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rh/polynomial.hpp"
#include "rh/predicates.hpp"
#include "rh/rules.hpp"

namespace rh {

struct FrenetState {
  double s = 0.0;
  double s_d = 0.0;
  double s_dd = 0.0;
  double d = 0.0;
  double d_d = 0.0;
  double d_dd = 0.0;
};

struct TrajectoryPoint {
  double t = 0.0;
  FrenetState f;
  double v = 0.0;
  double a = 0.0;
  double heading = 0.0;  // relative to the road
  double curvature = 0.0;
  double yaw_rate = 0.0;
  Vec2 xy;
};

enum class Infeasibility { kNone, kAcceleration, kCurvature, kVelocity, kOffRoad };
std::string_view to_string(Infeasibility v);

struct Candidate {
  int index = 0;  // generation order within its level
  double d_target = 0.0;
  double v_target = 0.0;
  double horizon = 0.0;
  Quintic lateral;
  Quartic longitudinal;
  std::vector<TrajectoryPoint> states;
  Infeasibility infeasible = Infeasibility::kNone;
  bool collides = false;
  std::map<std::string, double> costs;
  double total = 0.0;
};

struct PlannerParams {
  double timestep = 0.1;
  double horizon = 2.0;
  double replan_period = 0.5;
  double a_max = 8.0;
  double curvature_max = 0.2;
  double v_min = 0.0;
  double v_max = 50.0;
  double clearance_longitudinal = 3.0;
  double clearance_lateral = 0.5;
  std::vector<double> coarse_speed_offsets = {-2.0, 0.0, 2.0};
  std::vector<double> fine_speed_offsets = {-4.0, -2.0, 0.0, 2.0, 4.0};
  int cost_stride = 5;

  void validate() const;  // throws ConfigError
};

struct CostWeights {
  double value = 1.0;
  double rule_g1 = 2.0;
  double rule_i6 = 1.0;
  double rule_i2 = 0.5;
  double jerk = 0.01;
  double speed = 0.2;
  double lateral = 0.1;
  double desired_speed = 20.0;

  double rule(RuleId r) const;
};

// Learned state value of an ego state at a grid step.
class StateValue {
 public:
  virtual ~StateValue() = default;
  virtual double value(const RoadState& ego, int step) const = 0;
};

// Everything the planner sees at one replanning instant.
struct PlanContext {
  std::shared_ptr<const Traffic> traffic;
  FrenetFrame frame;
  std::vector<NoOvertakingZone> zones;
  double timestep = 0.1;
  int step = 0;  // grid step of the current ego state
  // Executed ego states ending with the current one (history.back() sits
  // at `step`). Feeds the rule cost terms.
  std::vector<RoadState> history;
  double ego_length = 4.5;
  double ego_width = 1.8;
  RuleParams rules;
  const StateValue* critic = nullptr;
};

// Lateral targets of a sampling level: lane centres and `subdivisions - 1`
// evenly spaced offsets between adjacent centres.
std::vector<double> lateral_targets(const FrenetFrame& frame, int subdivisions);

// Cartesian product of lateral targets and target speeds, one candidate per
// pair, states every timestep over the horizon. Throws PlannerError on an
// empty product.
std::vector<Candidate> sample_candidates(const FrenetState& start,
                                         std::span<const double> d_targets,
                                         std::span<const double> v_targets,
                                         const PlannerParams& params,
                                         const FrenetFrame& frame);

// First violated limit in order acceleration, curvature, velocity, off-road.
Infeasibility check_feasibility(const Candidate& c, const PlannerParams& params,
                                const FrenetFrame& frame, double ego_width);

RoadState road_state_of(const TrajectoryPoint& p, double length, double width);

// True when some step brings a replayed vehicle inside the ego's clearance box.
bool check_collision(const Candidate& c, const Traffic& traffic, int start_step,
                     double length, double width, double clearance_longitudinal,
                     double clearance_lateral);

// Fills c.costs and c.total. Throws ConfigError when the value weight is
// non-zero and no critic is attached.
void evaluate_cost(Candidate& c, const PlanContext& ctx, const CostWeights& weights,
                   const PlannerParams& params);

// Cheapest candidate: lower total, then lower |d_target|, then index.
const Candidate* select_best(std::span<const Candidate> candidates);

struct PlanResult {
  Candidate best;
  int level = 0;  // 0 coarse, 1 fine
  int sampled = 0;
  int feasible = 0;
  int collision_free = 0;
  std::vector<Candidate> evaluated;  // kept when debug is requested
};

// Throws PlannerError when every candidate of both levels is rejected.
PlanResult plan(const FrenetState& start, const PlanContext& ctx, const CostWeights& weights,
                const PlannerParams& params, bool keep_candidates = false);

// Candidate id, cost breakdown and verdicts as CSV.
std::string candidates_csv(std::span<const Candidate> candidates);

}  // namespace rh
