#pragma once

#include <array>
#include <span>
#include <vector>

#include "rh/scenario.hpp"

namespace rh {

inline constexpr int kNodeFeatures = 4;   // pos x, pos y, velocity, lane
inline constexpr int kEdgeFeatures = 6;   // rel pos x/y, rel vel x/y, left-of, same-lane
inline constexpr int kEgoFeatures = 12;

// Feature normalisations.
namespace features {
double position(double metres);              // f / 50
double velocity(double speed);               // (f - 15) / 20
double acceleration(double a);               // f / 20
double yaw_rate(double r);                   // clamp to [-1, 1]
double lane_bound(double metres);            // f / 2
double road_bound(double to_road, double to_lane);  // (road + lane) / 12
double heading_error(double rad);            // clamp to [-pi/4, pi/4]
double signed_log(double f);                 // log(|f| + 1) * sign(f), 0 -> 0
double relative_velocity(double v);          // f / 20
double sign_distance(double metres);         // (f - 50) / 50
}  // namespace features

enum EgoFeature {
  kEgoAcceleration,
  kEgoVelocity,
  kEgoYawRate,
  kEgoDistLeftBound,
  kEgoDistRightBound,
  kEgoDistLeftRoadBound,
  kEgoDistRightRoadBound,
  kEgoHeadingError,
  kEgoGoalDistLateral,
  kEgoGoalDistLongitudinal,
  kEgoLane,
  kEgoSignDistance,
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  std::array<double, kEdgeFeatures> features{};
};

struct TrafficGraph {
  std::vector<std::array<double, kNodeFeatures>> nodes;
  std::vector<int> vehicle_ids;  // parallel to nodes, kEgoId for the ego
  std::vector<GraphEdge> edges;  // sorted by (dst, src)
  std::array<double, kEgoFeatures> ego{};
  int ego_index = 0;
};

struct GraphParams {
  double sensor_radius = 100.0;
  double neighbor_radius = 50.0;
  int neighbors = 3;
  double sign_range = 100.0;
};

// Raw distance ahead to the next no-overtaking start sign, 0 inside a zone,
// capped at `range`.
double sign_distance_ahead(double s, std::span<const NoOvertakingZone> zones, double range);

// Ego-centred graph in the road frame. Nodes are the ego plus every vehicle
// within the sensor radius; each node links to its nearest neighbours closer
// than the neighbour radius, links are made bidirectional and only the
// ego's connected component is kept.
TrafficGraph build_graph(const RoadState& ego, std::span<const RoadState> others,
                         const FrenetFrame& frame, std::span<const NoOvertakingZone> zones,
                         double goal_s, const GraphParams& params = {});

// Graph at a scenario step; throws StateError when the step lies outside
// the scenario grid.
TrafficGraph build_graph(const Scenario& scenario, const RoadState& ego, int step,
                         const GraphParams& params = {});

}  // namespace rh
