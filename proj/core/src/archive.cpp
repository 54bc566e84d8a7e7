#include "rh/archive.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<std::string_view> next_line() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      std::vector<std::string_view> words;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) words.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!words.empty()) return words;
    }
    throw FormatError("archive: unexpected end of file");
  }

  std::vector<std::string_view> expect(std::string_view keyword, std::size_t args) {
    auto w = next_line();
    if (w.front() != keyword || w.size() != args + 1) {
      throw FormatError(fmt::format("archive line {}: expected '{}' with {} fields",
                                    line_no_, keyword, args));
    }
    return w;
  }

  double num(std::string_view s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw FormatError(fmt::format("archive line {}: bad number '{}'", line_no_, s));
    }
    return v;
  }

  int integer(std::string_view s) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw FormatError(fmt::format("archive line {}: bad integer '{}'", line_no_, s));
    }
    return v;
  }

  std::size_t count(std::string_view s) const {
    const int v = integer(s);
    if (v < 0) throw FormatError(fmt::format("archive line {}: negative count", line_no_));
    return static_cast<std::size_t>(v);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace

std::string write_archive(const Scenario& sc) {
  std::string out = "RHSCN 1\n";
  out += fmt::format("timestep {}\nsteps {}\n", sc.timestep, sc.steps);
  out += fmt::format("extent {} {} {}\n", sc.lanes.x_min(), sc.lanes.x_max(),
                     sc.lanes.y_axis_down() ? 1 : 0);
  out += fmt::format("lanes {}\n", sc.lanes.lanes().size());
  for (const Lane& l : sc.lanes.lanes()) {
    out += fmt::format("lane {} {} {} {}\n", l.id, l.center, l.width, l.direction);
  }
  out += fmt::format("signs {}\n", sc.signs.size());
  for (const TrafficSign& s : sc.signs) {
    out += fmt::format("sign {} {} {}\n", to_string(s.kind), s.s, s.direction);
  }
  const EgoConfig& e = sc.ego;
  out += fmt::format("ego {} {} {} {} {} {} {}\n", e.direction, e.start_min,
                     e.start_max, e.start_speed, e.goal_s, e.length, e.width);
  out += fmt::format("tracks {}\n", sc.tracks.size());
  for (const Track& t : sc.tracks) {
    out += fmt::format("track {} {} {}\n", t.id, t.first_step, t.states.size());
    for (const VehicleState& v : t.states) {
      out += fmt::format("{} {} {} {} {} {} {} {} {} {}\n", v.position.x,
                         v.position.y, v.velocity.x, v.velocity.y,
                         v.acceleration.x, v.acceleration.y, v.heading,
                         v.length, v.width, v.lane_id);
    }
  }
  out += "end\n";
  return out;
}

Scenario read_archive(std::string_view text) {
  Reader r(text);
  auto head = r.next_line();
  if (head.size() != 2 || head[0] != "RHSCN") {
    throw FormatError("archive: missing 'RHSCN' header");
  }
  if (head[1] != "1") {
    throw FormatError(fmt::format("archive: unsupported version {}", head[1]));
  }
  Scenario sc;
  sc.timestep = r.num(r.expect("timestep", 1)[1]);
  sc.steps = r.integer(r.expect("steps", 1)[1]);
  auto ext = r.expect("extent", 3);
  const double x_min = r.num(ext[1]);
  const double x_max = r.num(ext[2]);
  const bool y_down = r.integer(ext[3]) != 0;
  std::vector<Lane> lanes(r.count(r.expect("lanes", 1)[1]));
  for (Lane& l : lanes) {
    auto w = r.expect("lane", 4);
    l = {r.integer(w[1]), r.num(w[2]), r.num(w[3]), r.integer(w[4])};
  }
  sc.lanes = LaneNetwork(std::move(lanes), x_min, x_max, y_down);
  sc.signs.resize(r.count(r.expect("signs", 1)[1]));
  for (TrafficSign& s : sc.signs) {
    auto w = r.expect("sign", 3);
    s = {sign_kind_from_string(w[1]), r.num(w[2]), r.integer(w[3])};
  }
  auto e = r.expect("ego", 7);
  sc.ego = {r.integer(e[1]), r.num(e[2]), r.num(e[3]), r.num(e[4]),
            r.num(e[5]),     r.num(e[6]), r.num(e[7])};
  sc.tracks.resize(r.count(r.expect("tracks", 1)[1]));
  for (Track& t : sc.tracks) {
    auto w = r.expect("track", 3);
    t.id = r.integer(w[1]);
    t.first_step = r.integer(w[2]);
    t.states.resize(r.count(w[3]));
    for (VehicleState& v : t.states) {
      auto f = r.next_line();
      if (f.size() != 10) throw FormatError("archive: state line needs 10 fields");
      v.id = t.id;
      v.position = {r.num(f[0]), r.num(f[1])};
      v.velocity = {r.num(f[2]), r.num(f[3])};
      v.acceleration = {r.num(f[4]), r.num(f[5])};
      v.heading = r.num(f[6]);
      v.length = r.num(f[7]);
      v.width = r.num(f[8]);
      v.lane_id = r.integer(f[9]);
    }
  }
  if (r.next_line().front() != "end") throw FormatError("archive: missing 'end'");
  validate(sc);
  return sc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

void save_archive(const Scenario& scenario, const std::filesystem::path& path) {
  write_text_file(path, write_archive(scenario));
}

Scenario load_archive(const std::filesystem::path& path) {
  return read_archive(read_text_file(path));
}

}  // namespace rh
