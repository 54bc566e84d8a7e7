#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rh/scenario.hpp"

namespace rh {

// Self-describing scenario archive. Line oriented, space separated; the
// first line is "RHSCN 1". Numbers use shortest round-trip formatting, so
// write(read(text)) == text and read(write(s)) == s exactly.
//
//   RHSCN 1
//   timestep <dt>
//   steps <n>
//   extent <x_min> <x_max> <y_axis_down 0|1>
//   lanes <count>
//   lane <id> <center> <width> <direction>          (count lines)
//   signs <count>
//   sign <kind> <s> <direction>                     (count lines)
//   ego <direction> <start_min> <start_max> <start_speed> <goal_s> <length> <width>
//   tracks <count>
//   track <id> <first_step> <states>
//   <x> <y> <vx> <vy> <ax> <ay> <heading> <length> <width> <lane_id>   (states lines)
//   end
std::string write_archive(const Scenario& scenario);
Scenario read_archive(std::string_view text);

void save_archive(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_archive(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace rh
