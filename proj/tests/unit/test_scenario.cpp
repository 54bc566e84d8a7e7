#include <cmath>
#include <string>

#include "doctest.h"
#include "mini_world.hpp"
#include "rh/archive.hpp"
#include "rh/error.hpp"
#include "rh/random.hpp"
#include "rh/synthetic.hpp"
#include "rh/tracks_csv.hpp"

using namespace rh;

namespace {

LaneNetwork three_lanes(bool y_down) {
  std::vector<Lane> lanes;
  if (y_down) {
    // Image frame: the lower lanes drive towards +x, rightmost has the largest y.
    lanes = {{4, 20.0, 3.5, 1}, {5, 16.5, 3.5, 1}, {6, 13.0, 3.5, 1}};
  } else {
    lanes = {{1, 0.0, 3.5, 1}, {2, 3.5, 3.5, 1}, {3, 7.0, 3.5, 1}};
  }
  return LaneNetwork(lanes, 0.0, 400.0, y_down);
}

}  // namespace

TEST_CASE("frenet: on-axis and one lane to the left") {
  for (bool y_down : {false, true}) {
    const LaneNetwork net = three_lanes(y_down);
    const FrenetFrame f = net.frame(1);
    const Vec2 on_axis = f.to_cartesian({120.0, 0.0});
    CHECK(frenet_of(on_axis, net).d == doctest::Approx(0.0));
    const double left_y = y_down ? 16.5 : 3.5;
    CHECK(frenet_of({50.0, left_y}, net).d == doctest::Approx(3.5));
    CHECK(f.lane_index(3.5) == 1);
  }
}

TEST_CASE("frenet: random round trips") {
  Rng rng = make_rng(11, "frenet");
  for (bool y_down : {false, true}) {
    const LaneNetwork net = three_lanes(y_down);
    for (int k = 0; k < 1000; ++k) {
      const Vec2 p{uniform(rng, 0.0, 400.0), y_down ? uniform(rng, 12.0, 21.0) : uniform(rng, -1.5, 8.5)};
      const Vec2 q = cartesian_of(frenet_of(p, net), net);
      CHECK(std::abs(q.x - p.x) < 1e-9);
      CHECK(std::abs(q.y - p.y) < 1e-9);
    }
  }
}

TEST_CASE("frenet: far off-road point is a domain error") {
  const LaneNetwork net = three_lanes(false);
  CHECK_THROWS_AS(frenet_of({10.0, 40.0}, net), DomainError);
}

TEST_CASE("lane network rejects overlapping lanes") {
  CHECK_THROWS_AS(LaneNetwork({{1, 0.0, 3.5, 1}, {2, 2.0, 3.5, 1}}, 0.0, 100.0, false),
                  DataError);
}

TEST_CASE("tracks csv: empty tracks file gives a scenario without tracks") {
  const std::string meta =
      "frameRate,upperLaneMarkings,lowerLaneMarkings\n25,1;4.5;8,13;16.5;20\n";
  const std::string header =
      "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,laneId\n";
  const Scenario sc = parse_tracks_csv(meta, header);
  CHECK(sc.tracks.empty());
  CHECK(sc.lanes.lanes().size() == 4);
}

TEST_CASE("tracks csv: unknown lane id is a data error") {
  const std::string meta =
      "frameRate,upperLaneMarkings,lowerLaneMarkings\n25,1;4.5;8,13;16.5;20\n";
  const std::string tracks =
      "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,laneId\n"
      "1,1,10,14,4.5,1.8,20,0,0,0,9\n";
  CHECK_THROWS_AS(parse_tracks_csv(meta, tracks), DataError);
}

TEST_CASE("tracks csv: missing column is a format error") {
  const std::string meta = "frameRate\n25\n";
  CHECK_THROWS_AS(parse_tracks_csv(meta, "frame,id,x\n1,1,3\n"), FormatError);
}

TEST_CASE("tracks csv: box corner becomes the centre, direction from the lane") {
  const std::string meta =
      "frameRate,upperLaneMarkings,lowerLaneMarkings\n25,1;4.5;8,13;16.5;20\n";
  const std::string tracks =
      "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,laneId\n"
      "1,7,100,17.2,4.4,1.8,25,0,0,0,6\n"
      "2,7,101,17.2,4.4,1.8,25,0,0,0,6\n";
  const Scenario sc = parse_tracks_csv(meta, tracks);
  REQUIRE(sc.tracks.size() == 1);
  const VehicleState& v = sc.tracks[0].states.at(0);
  CHECK(v.position.x == doctest::Approx(102.2));
  CHECK(v.position.y == doctest::Approx(18.1));
  const FrenetFrame f = sc.lanes.frame(1);
  CHECK(f.lane_index(to_road(v, f).d) >= 0);
}

TEST_CASE("archive round trip is exact") {
  SyntheticSpec spec;
  spec.vehicles = 6;
  spec.duration = 5.0;
  spec.lane_changes = 2;
  const Scenario sc = insert_no_overtaking_sign(generate_synthetic_scenario(spec, 3), 3);
  const std::string text = write_archive(sc);
  CHECK(write_archive(read_archive(text)) == text);
  CHECK_THROWS_AS(read_archive("RHSCN 2\n"), FormatError);
}

TEST_CASE("synthetic: empty traffic and determinism") {
  SyntheticSpec spec;
  spec.lanes = 3;
  spec.vehicles = 0;
  spec.duration = 40.0;
  const Scenario empty = generate_synthetic_scenario(spec, 1);
  CHECK(empty.tracks.empty());
  CHECK(empty.steps == 401);

  spec.vehicles = 8;
  spec.lane_changes = 3;
  CHECK(write_archive(generate_synthetic_scenario(spec, 42)) ==
        write_archive(generate_synthetic_scenario(spec, 42)));
  CHECK(write_archive(generate_synthetic_scenario(spec, 42)) !=
        write_archive(generate_synthetic_scenario(spec, 43)));
}

TEST_CASE("synthetic: braking gap follows the integrated kinematics") {
  SyntheticSpec spec;
  spec.lanes = 2;
  spec.vehicles = 6;
  spec.duration = 20.0;
  spec.braking = BrakingEvent{};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario sc = generate_synthetic_scenario(spec, seed);
    const FrenetFrame f = sc.lanes.frame(1);
    const int brake_step = static_cast<int>(std::lround(spec.braking->time / sc.timestep));
    // The braking leader is the front-most vehicle that slows from the event on.
    const Track* leader = nullptr;
    for (const Track& t : sc.tracks) {
      const double before = t.at(brake_step)->velocity.x;
      const double after = t.at(brake_step + 5)->velocity.x;
      if (after < before - 1e-6 &&
          (leader == nullptr || t.at(0)->position.x > leader->at(0)->position.x)) {
        const bool same_lane_as_leader =
            leader == nullptr || t.at(0)->lane_id == leader->at(0)->lane_id;
        if (same_lane_as_leader) leader = &t;
      }
    }
    REQUIRE(leader != nullptr);
    const Track* follower = nullptr;
    for (const Track& t : sc.tracks) {
      if (t.at(0)->lane_id != leader->at(0)->lane_id) continue;
      if (t.at(0)->position.x >= leader->at(0)->position.x) continue;
      if (follower == nullptr || t.at(0)->position.x > follower->at(0)->position.x) follower = &t;
    }
    REQUIRE(follower != nullptr);
    int shrinking = 0;
    for (int k = brake_step; k + 1 < sc.steps && k < brake_step + 40; ++k) {
      const RoadState l0 = to_road(*leader->at(k), f);
      const RoadState f0 = to_road(*follower->at(k), f);
      const RoadState l1 = to_road(*leader->at(k + 1), f);
      const RoadState f1 = to_road(*follower->at(k + 1), f);
      const double g0 = l0.rear() - f0.front();
      const double g1 = l1.rear() - f1.front();
      // Trapezoid-rule integration of the speed difference bounds the gap change.
      const double lo = std::min(l0.vs - f0.vs, l1.vs - f1.vs) * sc.timestep;
      const double hi = std::max(l0.vs - f0.vs, l1.vs - f1.vs) * sc.timestep;
      CHECK(g1 - g0 >= lo - 1e-9);
      CHECK(g1 - g0 <= hi + 1e-9);
      if (l0.vs <= f0.vs && l1.vs <= f1.vs) {
        CHECK(g1 <= g0 + 1e-9);
        if (l1.vs < f1.vs) ++shrinking;
      }
    }
    CHECK(shrinking > 0);
  }
}

TEST_CASE("sign placement: bounds and mean over 1000 seeds") {
  SyntheticSpec spec;
  spec.duration = 1.0;
  const Scenario base = generate_synthetic_scenario(spec, 0);
  double lo = 1e9, hi = -1e9, sum = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scenario sc = insert_no_overtaking_sign(base, seed);
    REQUIRE(sc.signs.size() == 1);
    lo = std::min(lo, sc.signs[0].s);
    hi = std::max(hi, sc.signs[0].s);
    sum += sc.signs[0].s;
  }
  CHECK(lo >= 100.0);
  CHECK(hi <= 350.0);
  CHECK(std::abs(sum / 1000 - 225.0) <= 10.0);
  CHECK(insert_no_overtaking_sign(base, 5).signs[0].s ==
        insert_no_overtaking_sign(base, 5).signs[0].s);
  spec.road_length = 300.0;
  CHECK_THROWS_AS(insert_no_overtaking_sign(generate_synthetic_scenario(spec, 0), 1), RangeError);
}

TEST_CASE("resampling keeps the endpoints of a constant-speed track") {
  Scenario sc = mini::empty_road(2, 3.5, 200.0, 11, 0.04);
  mini::add_vehicle(sc, 1, 0, 11, 10.0, 0.0, 20.0);
  const Scenario r = resample(sc, 0.1);
  CHECK(r.timestep == doctest::Approx(0.1));
  CHECK(r.steps == 5);
  CHECK(r.tracks[0].at(4)->position.x == doctest::Approx(10.0 + 20.0 * 0.4));
}
