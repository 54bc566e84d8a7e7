#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rh::stl {

// Magnitude used for "no constraint" outcomes: an empty universal
// quantifier or an empty Globally window evaluates to +kCap, an empty Once
// window, an absent vehicle or a missing sign to -kCap. Inside temporal
// operators these values behave like +/- infinity.
inline constexpr double kCap = 1e6;

enum class Op { kPredicate, kNot, kAnd, kOr, kImplies, kGlobally, kOnce, kPrevious };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::kPredicate;
  std::string name;               // predicates only
  std::vector<std::string> args;  // predicates only
  std::string key;                // "name(arg,arg)", the trace lookup key
  std::vector<FormulaPtr> children;
  double window_lo = 0.0;  // Once window [lo, hi] seconds into the past
  double window_hi = 0.0;
};

// Builders. predicate() throws LookupError for names outside the
// registered predicate set; once() throws RangeError unless 0 <= lo <= hi.
FormulaPtr predicate(std::string name, std::vector<std::string> args);
FormulaPtr negation(FormulaPtr f);
FormulaPtr conjunction(std::vector<FormulaPtr> fs);
FormulaPtr disjunction(std::vector<FormulaPtr> fs);
FormulaPtr implies(FormulaPtr antecedent, FormulaPtr consequent);
FormulaPtr globally(FormulaPtr f);
FormulaPtr once(double lo, double hi, FormulaPtr f);
FormulaPtr previous(FormulaPtr f);

std::string to_string(const Formula& f);
// Distinct predicate keys of a formula in first-visit order.
std::vector<const Formula*> leaves(const Formula& f);

// Sampled robustness of one predicate; valid[i] == 0 marks samples without
// enough history.
struct Signal {
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
};

class TraceSet {
 public:
  TraceSet(double timestep, std::size_t length);

  void set(const std::string& key, Signal signal);
  const Signal& get(const std::string& key) const;  // throws LookupError
  double timestep() const { return timestep_; }
  std::size_t length() const { return length_; }

 private:
  double timestep_;
  std::size_t length_;
  std::unordered_map<std::string, Signal> signals_;
};

// kTruncate clips Once windows to the available valid history (an empty
// window is -kCap); kStrict reports an invalid timestep whenever a window
// reaches before the start of the trace or touches an invalid sample.
enum class HistoryPolicy { kTruncate, kStrict };

// Quantitative semantics: Not negates, And/Or take min/max, Implies a->b is
// max(-a, b), Globally is the inf over [t, end), Once[a,b] the sup over
// [t-b, t-a], Previous the value at t-1. nullopt marks an invalid timestep.
std::optional<double> robustness(const Formula& f, const TraceSet& traces,
                                 std::size_t t,
                                 HistoryPolicy policy = HistoryPolicy::kTruncate);

}  // namespace rh::stl
