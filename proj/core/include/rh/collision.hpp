#pragma once

#include "rh/lane_network.hpp"
#include "rh/scenario.hpp"

namespace rh {

struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
};

OrientedBox box_of(const RoadState& r);
// Grows the box by `longitudinal` metres at both ends and `lateral` metres
// at both sides, along its own axes.
OrientedBox inflate(const OrientedBox& b, double longitudinal, double lateral);

// Separating-axis test. Boxes that merely touch (within 1e-9 m) do not
// overlap.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

// Clearance test between two vehicles: false when b intrudes into a's box
// grown by the clearances.
bool keeps_clearance(const RoadState& a, const RoadState& b, double longitudinal,
                     double lateral);
inline bool keeps_clearance(const RoadState& a, const RoadState& b, double clearance) {
  return keeps_clearance(a, b, clearance, clearance);
}

}  // namespace rh
