#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rh/predicates.hpp"
#include "rh/stl.hpp"

namespace rh {

// Declaration order is the priority order: a G1 violation outweighs any
// I6 violation, which outweighs any I2 violation.
enum class RuleId { kG1 = 0, kI6 = 1, kI2 = 2 };
inline constexpr std::array<RuleId, 3> kRules = {RuleId::kG1, RuleId::kI6, RuleId::kI2};

std::string_view to_string(RuleId rule);
// Accepts "G1", "R_G1", "g1" and the like; throws LookupError.
RuleId rule_from_string(std::string_view text);

struct RuleParams : PredicateParams {
  double cut_in_window = 3.0;  // seconds a cut-in suspends the distance rule
  stl::HistoryPolicy history = stl::HistoryPolicy::kTruncate;
};

// Rule body without the outer Globally.
stl::FormulaPtr rule_formula(RuleId rule, const RuleParams& params);
// Rules universally quantified over the other vehicles.
bool rule_quantified(RuleId rule);

// Body robustness at the given ego indices (all indices when empty). The
// quantifier is expanded as a min over vehicles present at each index and
// yields +stl::kCap when nobody is present; nullopt marks an invalid index.
std::vector<std::optional<double>> rule_series(RuleId rule, const WorldView& world,
                                               const RuleParams& params,
                                               std::span<const std::size_t> indices = {});

std::optional<double> rule_robustness(RuleId rule, const WorldView& world, std::size_t i,
                                      const RuleParams& params);

double clip_robustness(double value, double bound = 10.0);

struct Verdict {
  std::array<bool, 3> violated{};  // in priority order
  double tie_break = 0.0;          // sum of clipped minima, larger is better
};

Verdict make_verdict(const std::array<double, 3>& minimum);
// True when a ranks strictly better than b.
bool ranks_before(const Verdict& a, const Verdict& b);

struct RuleBookReport {
  std::array<std::vector<std::optional<double>>, 3> series;
  std::array<double, 3> minimum{};  // running inf over valid indices
  std::array<int, 3> violations{};  // valid indices with negative robustness
  Verdict verdict;
};

RuleBookReport rulebook_evaluate(const WorldView& world, const RuleParams& params);

// Columns t, rule, value; invalid indices are skipped.
std::string robustness_csv(const RuleBookReport& report, const WorldView& world);

}  // namespace rh
