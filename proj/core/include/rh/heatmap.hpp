#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rh/graph.hpp"
#include "rh/rules.hpp"
#include "rh/value_net.hpp"

namespace rh {

struct GridSpec {
  double cell_long = 4.0;  // metres along the road
  double cell_lat = 1.0;   // metres across
};

struct EgoTemplate {
  double speed = 25.0;
};

// Row-major grid over the road of one driving direction: cell (row, col)
// covers s in [origin_s + col * cell_long, +cell_long) and d in
// [origin_d + row * cell_lat, +cell_lat). Cells whose centre is off the
// road are masked.
struct EvalGrid {
  std::string quantity;
  double origin_s = 0.0;
  double origin_d = 0.0;
  double cell_long = 4.0;
  double cell_lat = 1.0;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  double ego_speed = 0.0;
  std::vector<double> lane_bounds;  // d of every lane boundary, right to left
  std::vector<double> sign_s;       // no-overtaking start signs

  double value(int row, int col) const { return values[index(row, col)]; }
  bool is_valid(int row, int col) const { return valid[index(row, col)] != 0; }
  double centre_s(int col) const { return origin_s + (col + 0.5) * cell_long; }
  double centre_d(int row) const { return origin_d + (row + 0.5) * cell_lat; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col);
  }
  // Row whose centre lies closest to a lane's centre line.
  int lane_row(double lane_centre) const;
};

EvalGrid empty_grid(const Scenario& scenario, const GridSpec& spec, std::string quantity);

// Critic value with the ego template placed at every cell centre, the
// replayed vehicles taken at `step`.
EvalGrid value_heatmap(const ValueNet& net, const Scenario& scenario, int step,
                       const EgoTemplate& ego, const GridSpec& spec,
                       const GraphParams& graph = {});

// Value minus the value of the same cell on the road with every replayed
// vehicle removed; negative cells are where traffic lowers the value.
EvalGrid value_margin_heatmap(const ValueNet& net, const Scenario& scenario, int step,
                              const EgoTemplate& ego, const GridSpec& spec,
                              const GraphParams& graph = {});

// Instantaneous rule-body robustness with the ego template at every cell.
EvalGrid robustness_heatmap(RuleId rule, const Scenario& scenario, int step,
                            const EgoTemplate& ego, const GridSpec& spec,
                            const RuleParams& params = {});

// Distance before the sign of the last cell centre (walking upstream from
// the sign) that is not below threshold, ending a contiguous below-threshold
// run up to the sign. nullopt when the cell right before the sign is not
// below threshold; the full upstream distance when the run reaches the grid
// start.
std::optional<double> onset_distance(const EvalGrid& grid, int row, double sign_s,
                                     double threshold);

// Midpoint of the median over valid cells more than `far` metres upstream
// of the sign and the minimum over valid cells within `near` metres before it.
double onset_threshold(const EvalGrid& grid, double sign_s, double far = 150.0,
                       double near = 50.0);

// Median of the valid cells.
double grid_median(const EvalGrid& grid);

std::string grid_csv(const EvalGrid& grid);
// Rebuilds a grid written by grid_csv; cell geometry comes from the header
// comment line. Throws FormatError.
EvalGrid parse_grid_csv(const std::string& text);
std::string grid_svg(const EvalGrid& grid);

}  // namespace rh
