#include "rh/heatmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {
namespace {

RoadState template_state(double s, double d, const Scenario& sc, const EgoTemplate& ego) {
  RoadState r;
  r.id = kEgoId;
  r.s = s;
  r.d = d;
  r.vs = ego.speed;
  r.length = sc.ego.length;
  r.width = sc.ego.width;
  return r;
}

double parse_double(std::string_view t) {
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw FormatError(fmt::format("bad number '{}' in grid CSV", t));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

int EvalGrid::lane_row(double lane_centre) const {
  int best = 0;
  double best_dist = INFINITY;
  for (int r = 0; r < rows; ++r) {
    const double dist = std::abs(centre_d(r) - lane_centre);
    if (dist < best_dist - 1e-12) {
      best = r;
      best_dist = dist;
    }
  }
  return best;
}

EvalGrid empty_grid(const Scenario& sc, const GridSpec& spec, std::string quantity) {
  if (!(spec.cell_long > 0.0 && spec.cell_lat > 0.0)) throw RangeError("grid cells must be positive");
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  EvalGrid g;
  g.quantity = std::move(quantity);
  g.origin_s = 0.0;
  g.origin_d = frame.road_right();
  g.cell_long = spec.cell_long;
  g.cell_lat = spec.cell_lat;
  g.cols = static_cast<int>(std::ceil(frame.length() / spec.cell_long - 1e-9));
  g.rows = static_cast<int>(std::ceil((frame.road_left() - frame.road_right()) / spec.cell_lat - 1e-9));
  g.values.assign(static_cast<std::size_t>(g.rows * g.cols), 0.0);
  g.valid.assign(g.values.size(), 0);
  for (int r = 0; r < g.rows; ++r) {
    if (!frame.on_road(g.centre_d(r))) continue;
    for (int c = 0; c < g.cols; ++c) g.valid[g.index(r, c)] = 1;
  }
  for (int l = 0; l < frame.lane_count(); ++l) g.lane_bounds.push_back(frame.lane_right(l));
  g.lane_bounds.push_back(frame.road_left());
  for (const NoOvertakingZone& z : no_overtaking_zones(sc, sc.ego.direction)) g.sign_s.push_back(z.start);
  return g;
}

EvalGrid value_heatmap(const ValueNet& net, const Scenario& sc, int step, const EgoTemplate& ego,
                       const GridSpec& spec, const GraphParams& graph) {
  EvalGrid g = empty_grid(sc, spec, "value");
  g.ego_speed = ego.speed;
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  const auto others = road_states_at(sc, frame, step);
  const auto zones = no_overtaking_zones(sc, sc.ego.direction);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.is_valid(r, c)) continue;
      const RoadState e = template_state(g.centre_s(c), g.centre_d(r), sc, ego);
      g.values[g.index(r, c)] = net.forward(build_graph(e, others, frame, zones, sc.ego.goal_s, graph));
    }
  }
  return g;
}

EvalGrid value_margin_heatmap(const ValueNet& net, const Scenario& sc, int step, const EgoTemplate& ego,
                              const GridSpec& spec, const GraphParams& graph) {
  EvalGrid g = value_heatmap(net, sc, step, ego, spec, graph);
  Scenario empty = sc;
  empty.tracks.clear();
  const EvalGrid free = value_heatmap(net, empty, step, ego, spec, graph);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (g.valid[i]) g.values[i] -= free.values[i];
  }
  g.quantity = "value margin";
  return g;
}

EvalGrid robustness_heatmap(RuleId rule, const Scenario& sc, int step, const EgoTemplate& ego,
                            const GridSpec& spec, const RuleParams& params) {
  EvalGrid g = empty_grid(sc, spec, fmt::format("robustness {}", to_string(rule)));
  g.ego_speed = ego.speed;
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  auto traffic = std::make_shared<Traffic>(sc, frame, step, step);
  const auto zones = no_overtaking_zones(sc, sc.ego.direction);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.is_valid(r, c)) continue;
      EgoTrack track{step, {template_state(g.centre_s(c), g.centre_d(r), sc, ego)}};
      WorldView world(traffic, frame, zones, sc.timestep, std::move(track));
      const auto v = rule_robustness(rule, world, 0, params);
      if (v) {
        g.values[g.index(r, c)] = *v;
      } else {
        g.valid[g.index(r, c)] = 0;
      }
    }
  }
  return g;
}

std::optional<double> onset_distance(const EvalGrid& g, int row, double sign_s, double threshold) {
  if (row < 0 || row >= g.rows) throw RangeError(fmt::format("grid row {} does not exist", row));
  int col = -1;
  for (int c = 0; c < g.cols; ++c) {
    if (g.centre_s(c) < sign_s) col = c;
  }
  auto below = [&](int c) { return g.is_valid(row, c) && g.value(row, c) < threshold; };
  if (col < 0 || !below(col)) return std::nullopt;
  while (col >= 0 && below(col)) --col;
  if (col < 0) return sign_s - g.origin_s;
  return sign_s - g.centre_s(col);
}

double grid_median(const EvalGrid& g) {
  std::vector<double> v;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (g.valid[i]) v.push_back(g.values[i]);
  }
  if (v.empty()) throw RangeError("grid has no valid cells");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double onset_threshold(const EvalGrid& g, double sign_s, double far, double near) {
  std::vector<double> upstream;
  double low = INFINITY;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.is_valid(r, c)) continue;
      const double s = g.centre_s(c);
      if (s < sign_s - far) upstream.push_back(g.value(r, c));
      if (s < sign_s && s >= sign_s - near) low = std::min(low, g.value(r, c));
    }
  }
  if (upstream.empty() || !std::isfinite(low)) throw RangeError("grid does not cover the sign surroundings");
  std::sort(upstream.begin(), upstream.end());
  const std::size_t n = upstream.size();
  const double median = n % 2 == 1 ? upstream[n / 2] : 0.5 * (upstream[n / 2 - 1] + upstream[n / 2]);
  return 0.5 * (median + low);
}

std::string grid_csv(const EvalGrid& g) {
  std::string out = fmt::format(
      "# quantity={} origin_s={} origin_d={} cell_long={} cell_lat={} rows={} cols={} ego_speed={}\n",
      g.quantity, g.origin_s, g.origin_d, g.cell_long, g.cell_lat, g.rows, g.cols, g.ego_speed);
  out += "cell_x,cell_y,value\n";
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.is_valid(r, c)) continue;
      out += fmt::format("{},{},{}\n", c, r, g.value(r, c));
    }
  }
  return out;
}

EvalGrid parse_grid_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("grid CSV lacks its header comment");
  EvalGrid g;
  std::string quantity;
  // quantity may contain spaces; it runs up to " origin_s=".
  const auto qpos = line.find("quantity=");
  const auto opos = line.find(" origin_s=");
  if (qpos == std::string::npos || opos == std::string::npos) throw FormatError("grid CSV header is incomplete");
  g.quantity = line.substr(qpos + 9, opos - qpos - 9);
  for (std::string_view kv : split(std::string_view(line).substr(opos + 1), ' ')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw FormatError("grid CSV header is malformed");
    const auto key = kv.substr(0, eq);
    const double v = parse_double(kv.substr(eq + 1));
    if (key == "origin_s") g.origin_s = v;
    else if (key == "origin_d") g.origin_d = v;
    else if (key == "cell_long") g.cell_long = v;
    else if (key == "cell_lat") g.cell_lat = v;
    else if (key == "rows") g.rows = static_cast<int>(v);
    else if (key == "cols") g.cols = static_cast<int>(v);
    else if (key == "ego_speed") g.ego_speed = v;
    else throw FormatError(fmt::format("unknown grid header key '{}'", key));
  }
  if (g.rows < 0 || g.cols < 0) throw FormatError("grid dimensions must be non-negative");
  g.values.assign(static_cast<std::size_t>(g.rows * g.cols), 0.0);
  g.valid.assign(g.values.size(), 0);
  if (!std::getline(in, line) || line != "cell_x,cell_y,value") throw FormatError("grid CSV lacks the column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw FormatError(fmt::format("grid CSV row '{}' needs 3 fields", line));
    const int c = static_cast<int>(parse_double(f[0]));
    const int r = static_cast<int>(parse_double(f[1]));
    if (r < 0 || r >= g.rows || c < 0 || c >= g.cols) throw FormatError(fmt::format("grid cell ({}, {}) is outside the grid", c, r));
    g.values[g.index(r, c)] = parse_double(f[2]);
    g.valid[g.index(r, c)] = 1;
  }
  return g;
}

std::string grid_svg(const EvalGrid& g) {
  constexpr double kPx = 3.0;  // pixels per metre
  const double width = g.cols * g.cell_long * kPx;
  const double height = g.rows * g.cell_lat * kPx * 4.0;
  const double ys = g.cell_lat * kPx * 4.0;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!g.valid[i]) continue;
    lo = std::min(lo, g.values[i]);
    hi = std::max(hi, g.values[i]);
  }
  auto colour = [&](double v) {
    // Linear ramp from purple (low) to yellow (high).
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    const int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
    const int gr = static_cast<int>(std::lround(1 + t * (231 - 1)));
    const int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
    return fmt::format("#{:02x}{:02x}{:02x}", r, gr, b);
  };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1f}\" height=\"{:.1f}\" "
      "viewBox=\"0 0 {:.1f} {:.1f}\">\n",
      width, height + 20.0, width, height + 20.0);
  out += fmt::format("<title>{} (min {:.4g}, max {:.4g})</title>\n", g.quantity,
                     std::isfinite(lo) ? lo : 0.0, std::isfinite(hi) ? hi : 0.0);
  for (int r = 0; r < g.rows; ++r) {
    // Leftmost row on top.
    const double y = (g.rows - 1 - r) * ys;
    for (int c = 0; c < g.cols; ++c) {
      const std::string fill = g.is_valid(r, c) ? colour(g.value(r, c)) : std::string("#9e9e9e");
      out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                         c * g.cell_long * kPx, y, g.cell_long * kPx, ys, fill);
    }
  }
  for (double b : g.lane_bounds) {
    const double y = height - (b - g.origin_d) / g.cell_lat * ys;
    out += fmt::format("<line x1=\"0\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"white\" stroke-dasharray=\"6,4\"/>\n",
                       y, width, y);
  }
  for (double s : g.sign_s) {
    const double x = (s - g.origin_s) * kPx;
    out += fmt::format("<line x1=\"{:.1f}\" y1=\"0\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"red\" stroke-width=\"2\"/>\n",
                       x, x, height);
    out += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"6\" fill=\"red\"/>\n", x, height + 10.0);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace rh
