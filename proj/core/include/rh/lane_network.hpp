#pragma once

#include <optional>
#include <vector>

namespace rh {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Road-aligned coordinates: s along the driving direction, d positive to
// the driver's left, both in metres.
struct FrenetPoint {
  double s = 0.0;
  double d = 0.0;
};

struct Lane {
  int id = 0;
  double center = 0.0;  // native lateral (y) coordinate of the centre line
  double width = 0.0;
  int direction = 1;  // +1 travels towards +x, -1 towards -x
};

// Frenet frame for one driving direction of a straight road. The reference
// line is the centre of that direction's rightmost lane; s = 0 sits at the
// upstream end of the road extent.
//
// All handedness conventions live here: in a y-down (image) frame the
// driver's left when heading +x is -y, in a y-up frame it is +y.
class FrenetFrame {
 public:
  struct LaneSlot {
    int id;
    double center;  // d of the centre line
    double width;
  };

  FrenetFrame(int direction, double left_sign, double x_origin, double y_ref,
              double length, std::vector<LaneSlot> lanes);

  int direction() const { return direction_; }
  double left_sign() const { return left_sign_; }
  double length() const { return length_; }

  // Throws DomainError when the point lies more than one lane width outside
  // the road's lateral bounds.
  FrenetPoint to_frenet(Vec2 p) const;
  FrenetPoint to_frenet_unchecked(Vec2 p) const;
  Vec2 to_cartesian(FrenetPoint f) const;

  Vec2 velocity_to_cartesian(double vs, double vd) const;
  FrenetPoint velocity_to_frenet(Vec2 v) const;
  // Heading relative to the road direction (positive turns left) to native
  // heading in (-pi, pi], and back.
  double heading_to_cartesian(double relative) const;
  double heading_to_frenet(double native) const;

  int lane_count() const { return static_cast<int>(lanes_.size()); }
  const LaneSlot& lane(int index) const { return lanes_.at(index); }
  double lane_right(int index) const;
  double lane_left(int index) const;
  // Lane containing d; points off the road clamp to the nearest lane.
  int lane_index(double d) const;
  std::optional<int> lane_index_of_id(int lane_id) const;

  double road_right() const { return lane_right(0); }
  double road_left() const { return lane_left(lane_count() - 1); }
  bool on_road(double d) const { return d >= road_right() && d <= road_left(); }

 private:
  int direction_;
  double left_sign_;
  double x_origin_;
  double y_ref_;
  double length_;
  std::vector<LaneSlot> lanes_;  // rightmost first
};

// Straight, parallel lanes covering [x_min, x_max] in the native frame.
class LaneNetwork {
 public:
  LaneNetwork() = default;
  // Validates widths and that lanes do not overlap; throws DataError.
  LaneNetwork(std::vector<Lane> lanes, double x_min, double x_max,
              bool y_axis_down);

  const std::vector<Lane>& lanes() const { return lanes_; }
  const Lane* find(int id) const;
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double length() const { return x_max_ - x_min_; }
  bool y_axis_down() const { return y_axis_down_; }
  bool has_direction(int direction) const;

  // Throws DataError if no lane runs in that direction.
  FrenetFrame frame(int direction) const;

 private:
  std::vector<Lane> lanes_;
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  bool y_axis_down_ = false;
};

FrenetPoint frenet_of(Vec2 position, const LaneNetwork& network,
                      int direction = 1);
Vec2 cartesian_of(FrenetPoint point, const LaneNetwork& network,
                  int direction = 1);

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace rh
