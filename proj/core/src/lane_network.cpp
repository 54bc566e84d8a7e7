#include "rh/lane_network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

FrenetFrame::FrenetFrame(int direction, double left_sign, double x_origin,
                         double y_ref, double length,
                         std::vector<LaneSlot> lanes)
    : direction_(direction),
      left_sign_(left_sign),
      x_origin_(x_origin),
      y_ref_(y_ref),
      length_(length),
      lanes_(std::move(lanes)) {
  if (lanes_.empty()) throw DataError("Frenet frame needs at least one lane");
}

FrenetPoint FrenetFrame::to_frenet_unchecked(Vec2 p) const {
  return {direction_ * (p.x - x_origin_), left_sign_ * (p.y - y_ref_)};
}

FrenetPoint FrenetFrame::to_frenet(Vec2 p) const {
  const FrenetPoint f = to_frenet_unchecked(p);
  const double lo = road_right() - lanes_.front().width;
  const double hi = road_left() + lanes_.back().width;
  if (!(f.d >= lo && f.d <= hi)) {
    throw DomainError(fmt::format(
        "point ({}, {}) lies {:.3f} m off the road laterally", p.x, p.y,
        f.d < lo ? lo - f.d : f.d - hi));
  }
  return f;
}

Vec2 FrenetFrame::to_cartesian(FrenetPoint f) const {
  return {x_origin_ + direction_ * f.s, y_ref_ + left_sign_ * f.d};
}

Vec2 FrenetFrame::velocity_to_cartesian(double vs, double vd) const {
  return {direction_ * vs, left_sign_ * vd};
}

FrenetPoint FrenetFrame::velocity_to_frenet(Vec2 v) const {
  return {direction_ * v.x, left_sign_ * v.y};
}

double FrenetFrame::heading_to_cartesian(double relative) const {
  return wrap_angle(std::atan2(left_sign_ * std::sin(relative),
                               direction_ * std::cos(relative)));
}

double FrenetFrame::heading_to_frenet(double native) const {
  return wrap_angle(std::atan2(left_sign_ * std::sin(native),
                               direction_ * std::cos(native)));
}

double FrenetFrame::lane_right(int index) const {
  const LaneSlot& l = lanes_.at(index);
  return l.center - 0.5 * l.width;
}

double FrenetFrame::lane_left(int index) const {
  const LaneSlot& l = lanes_.at(index);
  return l.center + 0.5 * l.width;
}

int FrenetFrame::lane_index(double d) const {
  // Boundaries belong to the lane on their left, so every d maps to exactly
  // one lane and the lane-change threshold is sharp.
  int best = 0;
  double best_gap = INFINITY;
  for (int i = 0; i < lane_count(); ++i) {
    const double lo = lane_right(i);
    const double hi = lane_left(i);
    if (d >= lo && d < hi) return i;
    const double gap = d < lo ? lo - d : d - hi;
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

std::optional<int> FrenetFrame::lane_index_of_id(int lane_id) const {
  for (int i = 0; i < lane_count(); ++i) {
    if (lanes_[i].id == lane_id) return i;
  }
  return std::nullopt;
}

LaneNetwork::LaneNetwork(std::vector<Lane> lanes, double x_min, double x_max,
                         bool y_axis_down)
    : lanes_(std::move(lanes)),
      x_min_(x_min),
      x_max_(x_max),
      y_axis_down_(y_axis_down) {
  if (!(x_max_ > x_min_)) {
    throw DataError(fmt::format("lane extent [{}, {}] is empty", x_min, x_max));
  }
  for (const Lane& l : lanes_) {
    if (!(l.width > 0.0)) {
      throw DataError(fmt::format("lane {} has non-positive width", l.id));
    }
    if (l.direction != 1 && l.direction != -1) {
      throw DataError(fmt::format("lane {} has direction {}", l.id, l.direction));
    }
  }
  std::vector<Lane> sorted = lanes_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Lane& a, const Lane& b) { return a.center < b.center; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double gap = (sorted[i].center - 0.5 * sorted[i].width) -
                       (sorted[i - 1].center + 0.5 * sorted[i - 1].width);
    if (gap < -1e-9) {
      throw DataError(fmt::format("lanes {} and {} overlap", sorted[i - 1].id,
                                  sorted[i].id));
    }
  }
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    for (std::size_t j = i + 1; j < lanes_.size(); ++j) {
      if (lanes_[i].id == lanes_[j].id) {
        throw DataError(fmt::format("duplicate lane id {}", lanes_[i].id));
      }
    }
  }
}

const Lane* LaneNetwork::find(int id) const {
  for (const Lane& l : lanes_) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

bool LaneNetwork::has_direction(int direction) const {
  return std::any_of(lanes_.begin(), lanes_.end(),
                     [&](const Lane& l) { return l.direction == direction; });
}

FrenetFrame LaneNetwork::frame(int direction) const {
  const double left_sign = y_axis_down_ ? -direction : direction;
  std::vector<Lane> own;
  for (const Lane& l : lanes_) {
    if (l.direction == direction) own.push_back(l);
  }
  if (own.empty()) {
    throw DataError(fmt::format("no lane runs in direction {}", direction));
  }
  // Rightmost first: smallest leftward offset.
  std::sort(own.begin(), own.end(), [&](const Lane& a, const Lane& b) {
    return left_sign * a.center < left_sign * b.center;
  });
  const double y_ref = own.front().center;
  std::vector<FrenetFrame::LaneSlot> slots;
  slots.reserve(own.size());
  for (const Lane& l : own) {
    slots.push_back({l.id, left_sign * (l.center - y_ref), l.width});
  }
  const double x_origin = direction > 0 ? x_min_ : x_max_;
  return FrenetFrame(direction, left_sign, x_origin, y_ref, length(),
                     std::move(slots));
}

FrenetPoint frenet_of(Vec2 position, const LaneNetwork& network,
                      int direction) {
  return network.frame(direction).to_frenet(position);
}

Vec2 cartesian_of(FrenetPoint point, const LaneNetwork& network,
                  int direction) {
  return network.frame(direction).to_cartesian(point);
}

}  // namespace rh
