#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rh/predicates.hpp"
#include "rh/rules.hpp"
#include "rh/scenario.hpp"

// Reference implementations used only by the tests. Nothing in here calls
// into the robustness code of the library.
namespace oracle {

// Truth value of a registered predicate at ego index i. Lane membership is
// decided by lane index of the centre line or by strict interval overlap.
bool predicate_holds(std::string_view name, const rh::WorldView& world,
                     std::optional<int> other, std::size_t i,
                     const rh::PredicateParams& params);

// Rule body truth at index i with quantifier over the vehicles present at i.
// nullopt when the index has no defined value under truncated history.
std::optional<bool> rule_holds(rh::RuleId rule, const rh::WorldView& world,
                               std::size_t i, const rh::RuleParams& params);

// max over samples t-hi..t-lo that are valid, -cap if none.
double brute_once(std::span<const double> values, std::span<const std::uint8_t> valid,
                  std::size_t t, int lo, int hi, double cap);

double explained_variance(std::span<const double> predicted, std::span<const double> target);

// sum_{k>=t} gamma^(k-t) r_k + gamma^(n-t) bootstrap, summed term by term.
std::vector<double> brute_returns(std::span<const double> rewards, double gamma,
                                  double bootstrap);

}  // namespace oracle
