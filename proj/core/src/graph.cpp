#include "rh/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {

namespace features {
double position(double m) { return m / 50.0; }
double velocity(double v) { return (v - 15.0) / 20.0; }
double acceleration(double a) { return a / 20.0; }
double yaw_rate(double r) { return std::clamp(r, -1.0, 1.0); }
double lane_bound(double m) { return m / 2.0; }
double road_bound(double to_road, double to_lane) { return (to_road + to_lane) / 12.0; }
double heading_error(double h) {
  return std::clamp(h, -std::numbers::pi / 4.0, std::numbers::pi / 4.0);
}
double signed_log(double f) {
  if (f == 0.0) return 0.0;
  return std::log(std::abs(f) + 1.0) * (f > 0.0 ? 1.0 : -1.0);
}
double relative_velocity(double v) { return v / 20.0; }
double sign_distance(double m) { return (m - 50.0) / 50.0; }
}  // namespace features

double sign_distance_ahead(double s, std::span<const NoOvertakingZone> zones, double range) {
  double best = range;
  for (const NoOvertakingZone& z : zones) {
    if (s >= z.start && s <= z.end) return 0.0;
    if (z.start > s) best = std::min(best, z.start - s);
  }
  return best;
}

TrafficGraph build_graph(const RoadState& ego, std::span<const RoadState> others,
                         const FrenetFrame& frame, std::span<const NoOvertakingZone> zones,
                         double goal_s, const GraphParams& params) {
  // Candidate nodes: ego first, then others by (distance, id).
  std::vector<const RoadState*> members{&ego};
  {
    std::vector<std::pair<double, const RoadState*>> near;
    for (const RoadState& o : others) {
      const double dist = std::hypot(o.s - ego.s, o.d - ego.d);
      if (dist <= params.sensor_radius) near.emplace_back(dist, &o);
    }
    std::sort(near.begin(), near.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
    });
    for (const auto& [dist, o] : near) members.push_back(o);
  }
  const int n = static_cast<int>(members.size());

  std::set<std::pair<int, int>> links;  // (dst, src)
  for (int u = 0; u < n; ++u) {
    std::vector<std::pair<double, int>> cand;
    for (int v = 0; v < n; ++v) {
      if (v == u) continue;
      const double dist = std::hypot(members[v]->s - members[u]->s, members[v]->d - members[u]->d);
      if (dist < params.neighbor_radius) cand.emplace_back(dist, v);
    }
    std::sort(cand.begin(), cand.end());
    const int k = std::min<int>(params.neighbors, static_cast<int>(cand.size()));
    for (int j = 0; j < k; ++j) {
      links.emplace(u, cand[static_cast<std::size_t>(j)].second);
      links.emplace(cand[static_cast<std::size_t>(j)].second, u);
    }
  }

  // Keep the ego's connected component, in member order.
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [a, b] : links) adj[static_cast<std::size_t>(a)].push_back(b);
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    int next = 0;
    for (int u = 0; u < n; ++u) {
      if (seen[static_cast<std::size_t>(u)]) remap[static_cast<std::size_t>(u)] = next++;
    }
  }

  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  auto rotate = [&](double x, double y) {
    return std::array<double, 2>{c * x + s * y, -s * x + c * y};
  };
  auto lane_of = [&](const RoadState* r) { return frame.lane_index(r->d); };

  TrafficGraph g;
  for (int u = 0; u < n; ++u) {
    if (remap[static_cast<std::size_t>(u)] < 0) continue;
    const RoadState* r = members[static_cast<std::size_t>(u)];
    const auto p = rotate(r->s - ego.s, r->d - ego.d);
    g.nodes.push_back({features::position(p[0]), features::position(p[1]),
                       features::velocity(r->speed()), static_cast<double>(lane_of(r))});
    g.vehicle_ids.push_back(r->id);
  }
  for (const auto& [dst, src] : links) {
    const int a = remap[static_cast<std::size_t>(src)];
    const int b = remap[static_cast<std::size_t>(dst)];
    if (a < 0 || b < 0) continue;
    const RoadState* rs = members[static_cast<std::size_t>(src)];
    const RoadState* rd = members[static_cast<std::size_t>(dst)];
    const auto dp = rotate(rs->s - rd->s, rs->d - rd->d);
    const auto dv = rotate(rs->vs - rd->vs, rs->vd - rd->vd);
    const bool overlap = std::min(rs->front(), rd->front()) - std::max(rs->rear(), rd->rear()) > 0;
    GraphEdge e;
    e.src = a;
    e.dst = b;
    e.features = {features::position(dp[0]),
                  features::position(dp[1]),
                  features::relative_velocity(dv[0]),
                  features::relative_velocity(dv[1]),
                  lane_of(rs) > lane_of(rd) && overlap ? 1.0 : 0.0,
                  lane_of(rs) == lane_of(rd) ? 1.0 : 0.0};
    g.edges.push_back(e);
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    return x.dst != y.dst ? x.dst < y.dst : x.src < y.src;
  });

  const int lane = frame.lane_index(ego.d);
  const double to_left = frame.lane_left(lane) - ego.d;
  const double to_right = ego.d - frame.lane_right(lane);
  const double lateral_goal =
      frame.on_road(ego.d) ? 0.0
                           : (ego.d < frame.road_right() ? frame.road_right() - ego.d
                                                         : frame.road_left() - ego.d);
  g.ego = {features::acceleration(ego.as),
           features::velocity(ego.speed()),
           features::yaw_rate(ego.yaw_rate),
           features::lane_bound(to_left),
           features::lane_bound(to_right),
           features::road_bound(frame.road_left() - frame.lane_left(lane), to_left),
           features::road_bound(frame.lane_right(lane) - frame.road_right(), to_right),
           features::heading_error(ego.heading),
           features::signed_log(lateral_goal),
           features::signed_log(goal_s - ego.s),
           static_cast<double>(lane),
           features::sign_distance(sign_distance_ahead(ego.s, zones, params.sign_range))};
  g.ego_index = 0;
  return g;
}

TrafficGraph build_graph(const Scenario& scenario, const RoadState& ego, int step,
                         const GraphParams& params) {
  if (step < 0 || step >= scenario.steps) {
    throw StateError(fmt::format("step {} outside the scenario grid", step));
  }
  const FrenetFrame frame = scenario.lanes.frame(scenario.ego.direction);
  const auto others = road_states_at(scenario, frame, step);
  const auto zones = no_overtaking_zones(scenario, scenario.ego.direction);
  return build_graph(ego, others, frame, zones, scenario.ego.goal_s, params);
}

}  // namespace rh
