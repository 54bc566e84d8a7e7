#include "rh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "rh/archive.hpp"
#include "rh/error.hpp"

namespace rh {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(fmt::format("'{}' is not a number", v));
  }
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("'{}' is not an integer", v));
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean", v));
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{}", i ? "," : "", v[i]);
  return s;
}

struct Key {
  std::function<void(Settings&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

using Table = std::vector<std::pair<std::string, Key>>;  // "section.key"


template <class Getter>
Key real_key(Getter ref, double lo, double hi, bool lo_open = false) {
  return {[=](Settings& s, const std::string& v) {
            const double x = to_double(v);
            if (x < lo || x > hi || (lo_open && x == lo)) {
              throw ConfigError(fmt::format("{} is outside [{}, {}]", x, lo, hi));
            }
            ref(s) = x;
          },
          [=](const Settings& s) { return fmt::format("{}", ref(const_cast<Settings&>(s))); }};
}

template <class Getter>
Key int_key(Getter ref, long long lo, long long hi) {
  return {[=](Settings& s, const std::string& v) {
            const long long x = to_int(v);
            if (x < lo || x > hi) throw ConfigError(fmt::format("{} is outside [{}, {}]", x, lo, hi));
            ref(s) = static_cast<std::remove_reference_t<decltype(ref(s))>>(x);
          },
          [=](const Settings& s) { return fmt::format("{}", ref(const_cast<Settings&>(s))); }};
}

const Table& table() {
  constexpr double kBig = 1e9;
  static const Table t = {
      // environment
      {"environment.start_min", real_key([](Settings& s) -> double& { return s.train.env.start_min; }, 0, kBig)},
      {"environment.start_max", real_key([](Settings& s) -> double& { return s.train.env.start_max; }, 0, kBig)},
      {"environment.start_speed", real_key([](Settings& s) -> double& { return s.train.env.start_speed; }, 0, 100)},
      {"environment.random_lane",
       {[](Settings& s, const std::string& v) { s.train.env.random_lane = to_bool(v); },
        [](const Settings& s) { return std::string(s.train.env.random_lane ? "true" : "false"); }}},
      {"environment.sensor_radius", real_key([](Settings& s) -> double& { return s.train.env.graph.sensor_radius; }, 0, kBig, true)},
      {"environment.neighbor_radius", real_key([](Settings& s) -> double& { return s.train.env.graph.neighbor_radius; }, 0, kBig, true)},
      {"environment.neighbors", int_key([](Settings& s) -> int& { return s.train.env.graph.neighbors; }, 0, 64)},
      {"environment.sign_range", real_key([](Settings& s) -> double& { return s.train.env.graph.sign_range; }, 0, kBig, true)},
      // planner
      {"planner.horizon", real_key([](Settings& s) -> double& { return s.train.env.planner.horizon; }, 0, 60, true)},
      {"planner.replan_period", real_key([](Settings& s) -> double& { return s.train.env.planner.replan_period; }, 0, 60, true)},
      {"planner.a_max", real_key([](Settings& s) -> double& { return s.train.env.planner.a_max; }, 0, kBig, true)},
      {"planner.curvature_max", real_key([](Settings& s) -> double& { return s.train.env.planner.curvature_max; }, 0, kBig, true)},
      {"planner.v_min", real_key([](Settings& s) -> double& { return s.train.env.planner.v_min; }, 0, kBig)},
      {"planner.v_max", real_key([](Settings& s) -> double& { return s.train.env.planner.v_max; }, 0, kBig, true)},
      {"planner.clearance_longitudinal", real_key([](Settings& s) -> double& { return s.train.env.planner.clearance_longitudinal; }, 0, kBig)},
      {"planner.clearance_lateral", real_key([](Settings& s) -> double& { return s.train.env.planner.clearance_lateral; }, 0, kBig)},
      {"planner.coarse_speed_offsets",
       {[](Settings& s, const std::string& v) { s.train.env.planner.coarse_speed_offsets = to_list(v); },
        [](const Settings& s) { return list_text(s.train.env.planner.coarse_speed_offsets); }}},
      {"planner.fine_speed_offsets",
       {[](Settings& s, const std::string& v) { s.train.env.planner.fine_speed_offsets = to_list(v); },
        [](const Settings& s) { return list_text(s.train.env.planner.fine_speed_offsets); }}},
      {"planner.cost_stride", int_key([](Settings& s) -> int& { return s.train.env.planner.cost_stride; }, 1, 1000)},
      {"planner.desired_speed", real_key([](Settings& s) -> double& { return s.train.env.weights.desired_speed; }, 0, kBig)},
      {"planner.weight.value", real_key([](Settings& s) -> double& { return s.train.env.weights.value; }, 0, kBig)},
      {"planner.weight.rule_g1", real_key([](Settings& s) -> double& { return s.train.env.weights.rule_g1; }, 0, kBig)},
      {"planner.weight.rule_i6", real_key([](Settings& s) -> double& { return s.train.env.weights.rule_i6; }, 0, kBig)},
      {"planner.weight.rule_i2", real_key([](Settings& s) -> double& { return s.train.env.weights.rule_i2; }, 0, kBig)},
      {"planner.weight.jerk", real_key([](Settings& s) -> double& { return s.train.env.weights.jerk; }, 0, kBig)},
      {"planner.weight.speed", real_key([](Settings& s) -> double& { return s.train.env.weights.speed; }, 0, kBig)},
      {"planner.weight.lateral", real_key([](Settings& s) -> double& { return s.train.env.weights.lateral; }, 0, kBig)},
      // rules
      {"rules.safe_distance.delta", real_key([](Settings& s) -> double& { return s.train.env.rules.safe_delta; }, 0, 10)},
      {"rules.safe_distance.a_min", real_key([](Settings& s) -> double& { return s.train.env.rules.safe_a_min; }, -100, 0, false)},
      {"rules.cutin.t_c", real_key([](Settings& s) -> double& { return s.train.env.rules.cut_in_window; }, 0, 60)},
      {"rules.cutin.history",
       {[](Settings& s, const std::string& v) {
          if (v == "truncate") s.train.env.rules.history = stl::HistoryPolicy::kTruncate;
          else if (v == "strict") s.train.env.rules.history = stl::HistoryPolicy::kStrict;
          else throw ConfigError(fmt::format("'{}' is neither truncate nor strict", v));
        },
        [](const Settings& s) {
          return std::string(s.train.env.rules.history == stl::HistoryPolicy::kStrict ? "strict" : "truncate");
        }}},
      {"rules.sign.detection_range", real_key([](Settings& s) -> double& { return s.train.env.rules.detection_range; }, 0, kBig)},
      {"rules.congestion.gap", real_key([](Settings& s) -> double& { return s.train.env.rules.queue_gap; }, 0, kBig, true)},
      {"rules.congestion.min_vehicles", int_key([](Settings& s) -> int& { return s.train.env.rules.queue_min_vehicles; }, 1, 1000)},
      {"rules.congestion.speed", real_key([](Settings& s) -> double& { return s.train.env.rules.congestion_speed; }, 0, kBig)},
      {"rules.congestion.slow_moving_speed", real_key([](Settings& s) -> double& { return s.train.env.rules.slow_moving_speed; }, 0, kBig)},
      {"rules.congestion.queue_speed", real_key([](Settings& s) -> double& { return s.train.env.rules.queue_speed; }, 0, kBig)},
      // model
      {"model.hidden", int_key([](Settings& s) -> int& { return s.train.net.hidden; }, 1, 4096)},
      {"model.layers", int_key([](Settings& s) -> int& { return s.train.net.layers; }, 1, 64)},
      {"model.embed", int_key([](Settings& s) -> int& { return s.train.net.embed; }, 1, 4096)},
      {"model.head",
       {[](Settings& s, const std::string& v) {
          std::vector<int> w;
          for (double x : to_list(v)) {
            if (x < 1 || x != std::floor(x)) throw ConfigError("head widths must be positive integers");
            w.push_back(static_cast<int>(x));
          }
          s.train.net.head = w;
        },
        [](const Settings& s) {
          std::vector<double> d(s.train.net.head.begin(), s.train.net.head.end());
          return list_text(d);
        }}},
      // learning
      {"learning.rollout_steps", int_key([](Settings& s) -> int& { return s.train.rollout_steps; }, 1, 1 << 24)},
      {"learning.gamma", real_key([](Settings& s) -> double& { return s.train.gamma; }, 0, 1)},
      {"learning.rule_weight", real_key([](Settings& s) -> double& { return s.train.env.reward.rule_weight; }, 0, kBig)},
      {"learning.progression_weight", real_key([](Settings& s) -> double& { return s.train.env.reward.progression_weight; }, 0, kBig)},
      {"learning.reference_speed", real_key([](Settings& s) -> double& { return s.train.env.reward.reference_speed; }, 0, kBig, true)},
      {"learning.robustness_clip", real_key([](Settings& s) -> double& { return s.train.env.reward.clip; }, 0, kBig, true)},
      // training
      {"training.phase",
       {[](Settings& s, const std::string& v) {
          try {
            s.train.phase = rule_from_string(v);
          } catch (const LookupError& e) {
            throw ConfigError(e.what());
          }
        },
        [](const Settings& s) { return std::string(to_string(s.train.phase)).substr(2); }}},
      {"training.total_steps", int_key([](Settings& s) -> int& { return s.train.total_steps; }, 0, 1 << 30)},
      {"training.epochs", int_key([](Settings& s) -> int& { return s.train.epochs; }, 1, 1000)},
      {"training.batch_size", int_key([](Settings& s) -> int& { return s.train.batch_size; }, 1, 1 << 20)},
      {"training.lr", real_key([](Settings& s) -> double& { return s.train.adam.lr; }, 0, 10, true)},
      {"training.weight_decay", real_key([](Settings& s) -> double& { return s.train.adam.weight_decay; }, 0, 10)},
      {"training.scenarios", int_key([](Settings& s) -> int& { return s.scenarios; }, 1, 100000)},
      {"training.max_planner_failures", int_key([](Settings& s) -> int& { return s.train.max_planner_failures; }, 1, 1000000)},
      {"training.reward_window", int_key([](Settings& s) -> int& { return s.train.reward_window; }, 1, 1000000)},
      // eval
      {"eval.cell_long", real_key([](Settings& s) -> double& { return s.eval.grid.cell_long; }, 0, kBig, true)},
      {"eval.cell_lat", real_key([](Settings& s) -> double& { return s.eval.grid.cell_lat; }, 0, kBig, true)},
      {"eval.ego_speed", real_key([](Settings& s) -> double& { return s.eval.ego.speed; }, 0, 100)},
      {"eval.time_index", int_key([](Settings& s) -> int& { return s.eval.time_index; }, 0, 1 << 30)},
  };
  return t;
}

const Key* find_key(const std::string& full) {
  for (const auto& [name, key] : table()) {
    if (name == full) return &key;
  }
  return nullptr;
}

}  // namespace

Settings parse_config(const std::string& text) {
  static const std::vector<std::string> kSections = {"environment", "planner", "rules",   "model",
                                                     "learning",    "training", "eval"};
  Settings s;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
          throw ConfigError(fmt::format("unknown section [{}]", section));
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      if (section.empty()) throw ConfigError("key outside any section");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      const Key* k = find_key(section + "." + key);
      if (k == nullptr) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
      k->set(s, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  if (s.train.env.start_min > s.train.env.start_max) throw ConfigError("environment.start_min exceeds start_max");
  s.train.env.planner.timestep = s.train.env.reward.timestep;
  s.train.validate();
  return s;
}

Settings load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string dump_config(const Settings& settings) {
  std::string out;
  std::string section;
  for (const auto& [name, key] : table()) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", sec);
      section = sec;
    }
    out += fmt::format("{} = {}\n", name.substr(dot + 1), key.get(settings));
  }
  return out;
}

std::string text_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace rh
