#include "rh/stl.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/core.h>

#include "rh/error.hpp"
#include "rh/predicates.hpp"

namespace rh::stl {
namespace {

FormulaPtr make(Op op, std::vector<FormulaPtr> children) {
  for (const FormulaPtr& c : children) {
    if (!c) throw ParameterError("null STL sub-formula");
  }
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->children = std::move(children);
  return f;
}

std::optional<double> eval(const Formula& f, const TraceSet& tr, std::ptrdiff_t t,
                           HistoryPolicy policy) {
  const auto n = static_cast<std::ptrdiff_t>(tr.length());
  if (t < 0 || t >= n) return std::nullopt;
  switch (f.op) {
    case Op::kPredicate: {
      const Signal& s = tr.get(f.key);
      if (!s.valid[static_cast<std::size_t>(t)]) return std::nullopt;
      return s.values[static_cast<std::size_t>(t)];
    }
    case Op::kNot: {
      auto v = eval(*f.children[0], tr, t, policy);
      if (!v) return std::nullopt;
      return -*v;
    }
    case Op::kAnd:
    case Op::kOr: {
      const bool is_and = f.op == Op::kAnd;
      double acc = is_and ? INFINITY : -INFINITY;
      for (const FormulaPtr& c : f.children) {
        auto v = eval(*c, tr, t, policy);
        if (!v) return std::nullopt;
        acc = is_and ? std::min(acc, *v) : std::max(acc, *v);
      }
      return acc;
    }
    case Op::kImplies: {
      auto a = eval(*f.children[0], tr, t, policy);
      auto b = eval(*f.children[1], tr, t, policy);
      if (!a || !b) return std::nullopt;
      return std::max(-*a, *b);
    }
    case Op::kGlobally: {
      double acc = kCap;
      for (std::ptrdiff_t u = t; u < n; ++u) {
        auto v = eval(*f.children[0], tr, u, policy);
        if (!v) {
          if (policy == HistoryPolicy::kStrict) return std::nullopt;
          continue;
        }
        acc = std::min(acc, *v);
      }
      return acc;
    }
    case Op::kOnce: {
      const double dt = tr.timestep();
      const auto lo = static_cast<std::ptrdiff_t>(std::ceil(f.window_lo / dt - 1e-9));
      const auto hi = static_cast<std::ptrdiff_t>(std::floor(f.window_hi / dt + 1e-9));
      if (policy == HistoryPolicy::kStrict && t - hi < 0) return std::nullopt;
      double acc = -kCap;
      for (std::ptrdiff_t u = std::max<std::ptrdiff_t>(0, t - hi); u <= t - lo; ++u) {
        auto v = eval(*f.children[0], tr, u, policy);
        if (!v) {
          if (policy == HistoryPolicy::kStrict) return std::nullopt;
          continue;
        }
        acc = std::max(acc, *v);
      }
      return acc;
    }
    case Op::kPrevious:
      if (t == 0) return std::nullopt;
      return eval(*f.children[0], tr, t - 1, policy);
  }
  return std::nullopt;
}

void collect(const Formula& f, std::vector<const Formula*>& out,
             std::unordered_set<std::string>& seen) {
  if (f.op == Op::kPredicate) {
    if (seen.insert(f.key).second) out.push_back(&f);
    return;
  }
  for (const FormulaPtr& c : f.children) collect(*c, out, seen);
}

}  // namespace

FormulaPtr predicate(std::string name, std::vector<std::string> args) {
  if (!is_registered_predicate(name)) {
    throw LookupError(fmt::format("unknown predicate '{}'", name));
  }
  auto f = std::make_shared<Formula>();
  f->op = Op::kPredicate;
  f->key = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) f->key += ",";
    f->key += args[i];
  }
  f->key += ")";
  f->name = std::move(name);
  f->args = std::move(args);
  return f;
}

FormulaPtr negation(FormulaPtr f) { return make(Op::kNot, {std::move(f)}); }

FormulaPtr conjunction(std::vector<FormulaPtr> fs) {
  if (fs.empty()) throw ParameterError("empty conjunction");
  return make(Op::kAnd, std::move(fs));
}

FormulaPtr disjunction(std::vector<FormulaPtr> fs) {
  if (fs.empty()) throw ParameterError("empty disjunction");
  return make(Op::kOr, std::move(fs));
}

FormulaPtr implies(FormulaPtr antecedent, FormulaPtr consequent) {
  return make(Op::kImplies, {std::move(antecedent), std::move(consequent)});
}

FormulaPtr globally(FormulaPtr f) { return make(Op::kGlobally, {std::move(f)}); }

FormulaPtr once(double lo, double hi, FormulaPtr f) {
  if (!(lo >= 0.0 && lo <= hi)) {
    throw RangeError(fmt::format("Once window [{}, {}] is invalid", lo, hi));
  }
  auto node = std::const_pointer_cast<Formula>(make(Op::kOnce, {std::move(f)}));
  node->window_lo = lo;
  node->window_hi = hi;
  return node;
}

FormulaPtr previous(FormulaPtr f) { return make(Op::kPrevious, {std::move(f)}); }

std::string to_string(const Formula& f) {
  auto list = [&](std::string_view sep) {
    std::string s;
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i > 0) s += sep;
      s += to_string(*f.children[i]);
    }
    return s;
  };
  switch (f.op) {
    case Op::kPredicate:
      return f.key;
    case Op::kNot:
      return "!" + to_string(*f.children[0]);
    case Op::kAnd:
      return "(" + list(" & ") + ")";
    case Op::kOr:
      return "(" + list(" | ") + ")";
    case Op::kImplies:
      return "(" + list(" -> ") + ")";
    case Op::kGlobally:
      return "G " + to_string(*f.children[0]);
    case Op::kOnce:
      return fmt::format("O[{},{}] {}", f.window_lo, f.window_hi,
                         to_string(*f.children[0]));
    case Op::kPrevious:
      return "P " + to_string(*f.children[0]);
  }
  return "?";
}

std::vector<const Formula*> leaves(const Formula& f) {
  std::vector<const Formula*> out;
  std::unordered_set<std::string> seen;
  collect(f, out, seen);
  return out;
}

TraceSet::TraceSet(double timestep, std::size_t length)
    : timestep_(timestep), length_(length) {
  if (!(timestep > 0.0)) throw RangeError("trace timestep must be positive");
}

void TraceSet::set(const std::string& key, Signal signal) {
  if (signal.values.size() != length_ || signal.valid.size() != length_) {
    throw ParameterError(fmt::format("trace '{}' has the wrong length", key));
  }
  signals_[key] = std::move(signal);
}

const Signal& TraceSet::get(const std::string& key) const {
  auto it = signals_.find(key);
  if (it == signals_.end()) throw LookupError(fmt::format("no trace for '{}'", key));
  return it->second;
}

std::optional<double> robustness(const Formula& f, const TraceSet& traces,
                                 std::size_t t, HistoryPolicy policy) {
  return eval(f, traces, static_cast<std::ptrdiff_t>(t), policy);
}

}  // namespace rh::stl
