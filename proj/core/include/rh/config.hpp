#pragma once

#include <filesystem>
#include <string>

#include "rh/heatmap.hpp"
#include "rh/trainer.hpp"

namespace rh {

struct EvalSettings {
  GridSpec grid;
  EgoTemplate ego;
  int time_index = 0;
};

struct Settings {
  TrainConfig train;  // carries the environment, planner, rule, model and learning settings
  EvalSettings eval;
  int scenarios = 10;
};

// Flat "key = value" lines under [section] headers; '#' and ';' start
// comments. Sections: environment, planner, rules, model, learning,
// training, eval. Unknown sections or keys and out-of-range values throw
// ConfigError naming the line.
Settings parse_config(const std::string& text);
Settings load_config(const std::filesystem::path& path);

// Every recognised key with its current value, in file order.
std::string dump_config(const Settings& settings);

// FNV-1a of the text, 16 hex digits.
std::string text_hash(const std::string& text);

}  // namespace rh
