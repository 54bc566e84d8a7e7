#include "rh/tracks_csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double to_double(std::string_view s, std::string_view what, int line) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError(
        fmt::format("line {}: cannot parse {} value '{}'", line, what, s));
  }
  return v;
}

int to_int(std::string_view s, std::string_view what, int line) {
  const double v = to_double(s, what, line);
  if (v != std::floor(v)) {
    throw FormatError(fmt::format("line {}: {} must be an integer", line, what));
  }
  return static_cast<int>(v);
}

class Table {
 public:
  Table(std::string_view text, std::string_view name) : name_(name) {
    lines_ = lines_of(text);
    if (lines_.empty()) {
      throw FormatError(fmt::format("{}: missing header row", name));
    }
    header_ = split(lines_.front(), ',');
  }

  std::optional<std::size_t> column(std::string_view col) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == col) return i;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view col) const {
    auto c = column(col);
    if (!c) throw FormatError(fmt::format("{}: missing column '{}'", name_, col));
    return *c;
  }

  std::size_t rows() const { return lines_.size() - 1; }

  std::vector<std::string_view> row(std::size_t i) const {
    auto cells = split(lines_[i + 1], ',');
    if (cells.size() < header_.size()) {
      throw FormatError(fmt::format("{}: line {} has {} cells, expected {}",
                                    name_, i + 2, cells.size(), header_.size()));
    }
    return cells;
  }

 private:
  std::string_view name_;
  std::vector<std::string_view> lines_;
  std::vector<std::string_view> header_;
};

std::vector<double> parse_markings(std::string_view cell, int line) {
  std::vector<double> out;
  if (cell.empty()) return out;
  for (std::string_view part : split(cell, ';')) {
    out.push_back(to_double(part, "lane marking", line));
  }
  if (!std::is_sorted(out.begin(), out.end())) {
    throw DataError("lane markings must be increasing");
  }
  return out;
}

double round_print(double v) {
  const double r = std::round(v * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

Scenario parse_tracks_csv(std::string_view meta_text, std::string_view tracks_text) {
  Table meta(meta_text, "meta");
  double frame_rate = 25.0;
  std::vector<double> upper, lower;
  std::optional<double> x_min, x_max;
  bool y_down = true;
  if (meta.rows() > 0) {
    const auto r = meta.row(0);
    if (auto c = meta.column("frameRate")) frame_rate = to_double(r[*c], "frameRate", 2);
    if (auto c = meta.column("upperLaneMarkings")) upper = parse_markings(r[*c], 2);
    if (auto c = meta.column("lowerLaneMarkings")) lower = parse_markings(r[*c], 2);
    if (auto c = meta.column("xMin"); c && !r[*c].empty()) x_min = to_double(r[*c], "xMin", 2);
    if (auto c = meta.column("xMax"); c && !r[*c].empty()) x_max = to_double(r[*c], "xMax", 2);
    if (auto c = meta.column("yAxisDown"); c && !r[*c].empty()) {
      y_down = to_int(r[*c], "yAxisDown", 2) != 0;
    }
  }
  if (!(frame_rate > 0.0)) throw DataError("frameRate must be positive");

  std::vector<Lane> lanes;
  const int nu = static_cast<int>(upper.size());
  for (int i = 0; i + 1 < nu; ++i) {
    lanes.push_back({i + 2, 0.5 * (upper[i] + upper[i + 1]), upper[i + 1] - upper[i], -1});
  }
  for (int j = 0; j + 1 < static_cast<int>(lower.size()); ++j) {
    lanes.push_back({nu + 2 + j, 0.5 * (lower[j] + lower[j + 1]),
                     lower[j + 1] - lower[j], 1});
  }

  Table tracks(tracks_text, "tracks");
  const std::size_t c_frame = tracks.require("frame");
  const std::size_t c_id = tracks.require("id");
  const std::size_t c_x = tracks.require("x");
  const std::size_t c_y = tracks.require("y");
  const std::size_t c_w = tracks.require("width");
  const std::size_t c_h = tracks.require("height");
  const std::size_t c_vx = tracks.require("xVelocity");
  const std::size_t c_vy = tracks.require("yVelocity");
  const std::size_t c_ax = tracks.require("xAcceleration");
  const std::size_t c_ay = tracks.require("yAcceleration");
  const std::size_t c_lane = tracks.require("laneId");

  std::map<int, Track> by_id;
  double seen_min = INFINITY, seen_max = -INFINITY;
  int max_frame = 0;
  for (std::size_t i = 0; i < tracks.rows(); ++i) {
    const int line = static_cast<int>(i) + 2;
    const auto r = tracks.row(i);
    const int frame = to_int(r[c_frame], "frame", line);
    const int id = to_int(r[c_id], "id", line);
    if (frame < 0) throw DataError(fmt::format("line {}: negative frame", line));
    VehicleState v;
    v.id = id;
    const double x = to_double(r[c_x], "x", line);
    const double y = to_double(r[c_y], "y", line);
    v.length = to_double(r[c_w], "width", line);
    v.width = to_double(r[c_h], "height", line);
    v.position = {x + 0.5 * v.length, y + 0.5 * v.width};
    v.velocity = {to_double(r[c_vx], "xVelocity", line),
                  to_double(r[c_vy], "yVelocity", line)};
    v.acceleration = {to_double(r[c_ax], "xAcceleration", line),
                      to_double(r[c_ay], "yAcceleration", line)};
    v.lane_id = to_int(r[c_lane], "laneId", line);
    const Lane* lane = nullptr;
    for (const Lane& l : lanes) {
      if (l.id == v.lane_id) lane = &l;
    }
    if (lane == nullptr) {
      throw DataError(fmt::format("line {}: vehicle {} frame {} uses laneId {} "
                                  "which is not in the meta lane list",
                                  line, id, frame, v.lane_id));
    }
    const double speed = std::hypot(v.velocity.x, v.velocity.y);
    v.heading = speed > 0.1 ? std::atan2(v.velocity.y, v.velocity.x)
                            : (lane->direction > 0 ? 0.0 : std::numbers::pi);

    Track& t = by_id[id];
    if (t.states.empty()) {
      t.id = id;
      t.first_step = frame;
    } else if (frame != t.last_step() + 1) {
      throw DataError(fmt::format(
          "line {}: vehicle {} frame {} does not follow frame {}", line, id,
          frame, t.last_step()));
    }
    t.states.push_back(v);
    max_frame = std::max(max_frame, frame);
    seen_min = std::min(seen_min, x);
    seen_max = std::max(seen_max, x + v.length);
  }

  Scenario sc;
  sc.timestep = 1.0 / frame_rate;
  sc.steps = by_id.empty() ? 1 : max_frame + 1;
  for (auto& [id, t] : by_id) sc.tracks.push_back(std::move(t));
  const double lo = x_min.value_or(std::isfinite(seen_min) ? std::floor(seen_min) : 0.0);
  const double hi = x_max.value_or(std::isfinite(seen_max) ? std::ceil(seen_max) : 420.0);
  sc.lanes = LaneNetwork(std::move(lanes), lo, hi > lo ? hi : lo + 1.0, y_down);

  // Ego defaults: the +x direction when it exists; goal at the downstream end.
  sc.ego.direction = sc.lanes.has_direction(1) || sc.lanes.lanes().empty() ? 1 : -1;
  sc.ego.goal_s = sc.lanes.length();
  sc.ego.start_max = std::min(sc.ego.start_max, sc.ego.goal_s);
  sc.ego.start_min = std::min(sc.ego.start_min, sc.ego.start_max);
  return sc;
}

std::string write_tracks_csv(const Scenario& scenario) {
  std::string out =
      "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,"
      "yAcceleration,laneId\n";
  for (const Track& t : scenario.tracks) {
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const VehicleState& v = t.states[i];
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n",
                         t.first_step + static_cast<int>(i), t.id,
                         round_print(v.position.x - 0.5 * v.length),
                         round_print(v.position.y - 0.5 * v.width),
                         round_print(v.length), round_print(v.width),
                         round_print(v.velocity.x), round_print(v.velocity.y),
                         round_print(v.acceleration.x),
                         round_print(v.acceleration.y), v.lane_id);
    }
  }
  return out;
}

std::string write_meta_csv(const Scenario& scenario) {
  // Rebuild marking lists per direction from lane edges, top to bottom.
  const bool y_down = scenario.lanes.y_axis_down();
  std::vector<Lane> upper, lower;
  for (const Lane& l : scenario.lanes.lanes()) {
    (l.direction > 0 ? lower : upper).push_back(l);
  }
  auto markings = [](std::vector<Lane> lanes) {
    std::sort(lanes.begin(), lanes.end(),
              [](const Lane& a, const Lane& b) { return a.center < b.center; });
    std::string s;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      if (i == 0) s += fmt::format("{}", round_print(lanes[i].center - 0.5 * lanes[i].width));
      s += fmt::format(";{}", round_print(lanes[i].center + 0.5 * lanes[i].width));
    }
    return s;
  };
  return fmt::format(
      "frameRate,upperLaneMarkings,lowerLaneMarkings,xMin,xMax,yAxisDown\n"
      "{},{},{},{},{},{}\n",
      round_print(1.0 / scenario.timestep), markings(upper), markings(lower),
      round_print(scenario.lanes.x_min()), round_print(scenario.lanes.x_max()),
      y_down ? 1 : 0);
}

}  // namespace rh
