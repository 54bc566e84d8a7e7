#include "rh/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rh {
namespace {

std::array<Vec2, 4> corners(const OrientedBox& b) {
  const double c = std::cos(b.heading);
  const double s = std::sin(b.heading);
  const double hl = 0.5 * b.length;
  const double hw = 0.5 * b.width;
  std::array<Vec2, 4> out;
  const double sx[4] = {1, 1, -1, -1};
  const double sy[4] = {1, -1, -1, 1};
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] = {b.center.x + sx[i] * hl * c - sy[i] * hw * s,
                                        b.center.y + sx[i] * hl * s + sy[i] * hw * c};
  }
  return out;
}

bool separated_on(const std::array<Vec2, 4>& pa, const std::array<Vec2, 4>& pb, Vec2 axis) {
  double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
  for (const Vec2& p : pa) {
    const double v = p.x * axis.x + p.y * axis.y;
    amin = std::min(amin, v);
    amax = std::max(amax, v);
  }
  for (const Vec2& p : pb) {
    const double v = p.x * axis.x + p.y * axis.y;
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  constexpr double kTouch = 1e-9;
  return amax <= bmin + kTouch || bmax <= amin + kTouch;
}

}  // namespace

OrientedBox box_of(const RoadState& r) { return {{r.s, r.d}, r.heading, r.length, r.width}; }

OrientedBox inflate(const OrientedBox& b, double longitudinal, double lateral) {
  OrientedBox out = b;
  out.length += 2.0 * longitudinal;
  out.width += 2.0 * lateral;
  return out;
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto pa = corners(a);
  const auto pb = corners(b);
  for (double h : {a.heading, b.heading}) {
    const Vec2 ax1{std::cos(h), std::sin(h)};
    const Vec2 ax2{-std::sin(h), std::cos(h)};
    if (separated_on(pa, pb, ax1) || separated_on(pa, pb, ax2)) return false;
  }
  return true;
}

bool keeps_clearance(const RoadState& a, const RoadState& b, double longitudinal,
                     double lateral) {
  return !boxes_overlap(inflate(box_of(a), longitudinal, lateral), box_of(b));
}

}  // namespace rh
