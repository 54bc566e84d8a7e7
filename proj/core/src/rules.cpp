#include "rh/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {

std::string_view to_string(RuleId rule) {
  switch (rule) {
    case RuleId::kG1:
      return "R_G1";
    case RuleId::kI6:
      return "R_I6";
    case RuleId::kI2:
      return "R_I2";
  }
  return "?";
}

RuleId rule_from_string(std::string_view text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t.rfind("R_", 0) == 0) t = t.substr(2);
  if (t == "G1") return RuleId::kG1;
  if (t == "I6") return RuleId::kI6;
  if (t == "I2") return RuleId::kI2;
  throw LookupError(fmt::format("unknown rule '{}'", text));
}

stl::FormulaPtr rule_formula(RuleId rule, const RuleParams& p) {
  using namespace stl;
  switch (rule) {
    case RuleId::kG1: {
      auto cut = predicate("cut_in", {"x0", "ego"});
      auto fresh_cut = conjunction({cut, previous(negation(cut))});
      auto ahead = conjunction({predicate("in_same_lane", {"ego", "x0"}),
                                predicate("in_front_of", {"ego", "x0"}),
                                negation(once(0.0, p.cut_in_window, fresh_cut))});
      return implies(ahead, predicate("keeps_safe_distance_prec", {"ego", "x0"}));
    }
    case RuleId::kI6:
      return implies(predicate("no_overtaking_sign", {"ego"}),
                     predicate("in_rightmost_lane", {"ego"}));
    case RuleId::kI2: {
      auto passing = conjunction(
          {predicate("left_of", {"x0", "ego"}), predicate("drives_faster", {"ego", "x0"})});
      return implies(passing, disjunction({predicate("in_congestion", {"x0"}),
                                           predicate("in_slow_moving_traffic", {"x0"}),
                                           predicate("in_queue_of_vehicles", {"x0"})}));
    }
  }
  throw LookupError("unknown rule");
}

bool rule_quantified(RuleId rule) { return rule != RuleId::kI6; }

std::vector<std::optional<double>> rule_series(RuleId rule, const WorldView& world,
                                               const RuleParams& params,
                                               std::span<const std::size_t> indices) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(world.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = all;
  }
  const auto formula = rule_formula(rule, params);
  std::vector<std::optional<double>> out(indices.size());

  if (!rule_quantified(rule)) {
    const auto traces = predicate_traces(*formula, world, std::nullopt, params);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      out[k] = stl::robustness(*formula, traces, indices[k], params.history);
    }
    return out;
  }

  std::vector<double> acc(indices.size(), stl::kCap);
  std::vector<std::uint8_t> valid(indices.size(), 1);
  for (int id : world.other_ids()) {
    bool seen = false;
    for (std::size_t i : indices) {
      if (world.other(id, i) != nullptr) {
        seen = true;
        break;
      }
    }
    if (!seen) continue;
    const auto traces = predicate_traces(*formula, world, id, params);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (world.other(id, indices[k]) == nullptr) continue;
      const auto r = stl::robustness(*formula, traces, indices[k], params.history);
      if (!r) {
        valid[k] = 0;
      } else {
        acc[k] = std::min(acc[k], *r);
      }
    }
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (valid[k]) out[k] = acc[k];
  }
  return out;
}

std::optional<double> rule_robustness(RuleId rule, const WorldView& world, std::size_t i,
                                      const RuleParams& params) {
  const std::size_t idx[1] = {i};
  return rule_series(rule, world, params, idx)[0];
}

double clip_robustness(double value, double bound) { return std::clamp(value, -bound, bound); }

Verdict make_verdict(const std::array<double, 3>& minimum) {
  Verdict v;
  for (std::size_t r = 0; r < 3; ++r) {
    v.violated[r] = minimum[r] < 0.0;
    v.tie_break += clip_robustness(minimum[r]);
  }
  return v;
}

bool ranks_before(const Verdict& a, const Verdict& b) {
  for (std::size_t r = 0; r < 3; ++r) {
    if (a.violated[r] != b.violated[r]) return !a.violated[r];
  }
  return a.tie_break > b.tie_break;
}

RuleBookReport rulebook_evaluate(const WorldView& world, const RuleParams& params) {
  RuleBookReport report;
  for (RuleId rule : kRules) {
    const auto r = static_cast<std::size_t>(rule);
    report.series[r] = rule_series(rule, world, params);
    double m = stl::kCap;
    for (const auto& v : report.series[r]) {
      if (!v) continue;
      m = std::min(m, *v);
      if (*v < 0.0) ++report.violations[r];
    }
    report.minimum[r] = m;
  }
  report.verdict = make_verdict(report.minimum);
  return report;
}

std::string robustness_csv(const RuleBookReport& report, const WorldView& world) {
  std::string out = "t,rule,value\n";
  for (std::size_t i = 0; i < world.size(); ++i) {
    for (RuleId rule : kRules) {
      const auto& v = report.series[static_cast<std::size_t>(rule)][i];
      if (!v) continue;
      out += fmt::format("{:.1f},{},{:.6f}\n", world.step(i) * world.timestep(),
                         to_string(rule), *v);
    }
  }
  return out;
}

}  // namespace rh
