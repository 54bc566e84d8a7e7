#include <cmath>

#include "doctest.h"
#include "mini_world.hpp"
#include "oracles.hpp"
#include "rh/error.hpp"
#include "rh/rules.hpp"
#include "rh/stl.hpp"

using namespace rh;
namespace st = rh::stl;

namespace {

st::TraceSet traces_of(std::initializer_list<std::pair<const char*, std::vector<double>>> in) {
  std::size_t n = in.begin()->second.size();
  st::TraceSet ts(0.1, n);
  for (const auto& [name, values] : in) {
    ts.set(std::string(name) + "(ego)", {values, std::vector<std::uint8_t>(n, 1)});
  }
  return ts;
}

st::FormulaPtr p(const char* name) { return st::predicate(name, {"ego"}); }

}  // namespace

TEST_CASE("stl: min, implication and once windows") {
  const auto ts = traces_of({{"in_rightmost_lane", {3.0, -2.0, -1.0, 4.0}},
                             {"no_overtaking_sign", {-1.0, -5.0, -1.0, -1.0}}});
  const auto a = p("in_rightmost_lane");
  const auto b = p("no_overtaking_sign");
  CHECK(*st::robustness(*st::conjunction({a, b}), ts, 0) == -1.0);
  CHECK(*st::robustness(*st::implies(a, b), ts, 1) == 2.0);
  CHECK(*st::robustness(*st::implies(b, a), ts, 1) == 5.0);
  CHECK(*st::robustness(*st::negation(a), ts, 0) == -3.0);
  CHECK(*st::robustness(*st::disjunction({a, b}), ts, 1) == -2.0);
  CHECK(*st::robustness(*st::globally(a), ts, 0) == -2.0);
  CHECK(*st::robustness(*st::globally(a), ts, 3) == 4.0);
}

TEST_CASE("stl: once over [0, 2 s] reaches back to the peak") {
  const auto ts = traces_of({{"in_rightmost_lane", {-1.0, -1.0, 4.0, -1.0}}});
  CHECK(*st::robustness(*st::once(0.0, 2.0, p("in_rightmost_lane")), ts, 3) == 4.0);
  CHECK(*st::robustness(*st::once(0.0, 0.05, p("in_rightmost_lane")), ts, 3) == -1.0);
  CHECK(*st::robustness(*st::once(0.2, 0.3, p("in_rightmost_lane")), ts, 1) == -st::kCap);
  CHECK_FALSE(st::robustness(*st::once(0.0, 2.0, p("in_rightmost_lane")), ts, 3,
                             st::HistoryPolicy::kStrict)
                  .has_value());
  CHECK(*st::robustness(*st::once(0.0, 0.3, p("in_rightmost_lane")), ts, 3,
                        st::HistoryPolicy::kStrict) == 4.0);
}

TEST_CASE("stl: previous is invalid at the first sample") {
  const auto ts = traces_of({{"in_rightmost_lane", {1.0, 2.0}}});
  CHECK_FALSE(st::robustness(*st::previous(p("in_rightmost_lane")), ts, 0).has_value());
  CHECK(*st::robustness(*st::previous(p("in_rightmost_lane")), ts, 1) == 1.0);
}

TEST_CASE("stl: builders validate their input") {
  CHECK_THROWS_AS(st::predicate("teleports", {"ego"}), LookupError);
  CHECK_THROWS_AS(st::once(2.0, 1.0, p("in_rightmost_lane")), RangeError);
  CHECK_THROWS_AS(st::once(-1.0, 1.0, p("in_rightmost_lane")), RangeError);
  const auto ts = traces_of({{"in_rightmost_lane", {1.0}}});
  CHECK_THROWS_AS(st::robustness(*p("no_overtaking_sign"), ts, 0), LookupError);
}

TEST_CASE("predicates: geometric examples") {
  Scenario sc = mini::empty_road(3, 3.5, 400.0, 10);
  // Ego front at 102.25, other rear at 114.25.
  mini::add_vehicle(sc, 1, 0, 10, 116.5, 0.0, 20.0);
  mini::add_vehicle(sc, 2, 0, 10, 100.0, 3.5, 20.0);
  const WorldView w(sc, mini::constant_ego(0, 1, 100.0, 0.0, 20.0));
  const PredicateParams pp;
  CHECK(eval_predicate("in_front_of", w, 1, 0, pp) == doctest::Approx(12.0));
  CHECK(eval_predicate("drives_faster", w, 2, 0, pp) == 0.0);
  CHECK(eval_predicate("in_same_lane", w, 1, 0, pp) > 0.0);
  CHECK(eval_predicate("in_same_lane", w, 2, 0, pp) < 0.0);
  CHECK(eval_predicate("left_of", w, 2, 0, pp) > 0.0);
  CHECK(eval_predicate("left_of", w, 1, 0, pp) < 0.0);
  CHECK(eval_predicate("in_rightmost_lane", w, std::nullopt, 0, pp) == doctest::Approx(1.75));
  CHECK(eval_predicate("no_overtaking_sign", w, std::nullopt, 0, pp) == -st::kCap);
  CHECK(eval_predicate("in_front_of", w, 99, 0, pp) == -st::kCap);
  CHECK_THROWS_AS(eval_predicate("flies", w, 1, 0, pp), LookupError);
  CHECK_THROWS_AS(eval_predicate("cut_in", w, 1, 0, pp), StateError);
}

TEST_CASE("predicates: safe distance boundary is zero") {
  const PredicateParams pp;
  const double need = safe_distance(25.0, 20.0, pp);
  CHECK(need == doctest::Approx(25.0 * 0.3 + (625.0 - 400.0) / 20.0));
  Scenario sc = mini::empty_road(2, 3.5, 400.0, 2);
  mini::add_vehicle(sc, 1, 0, 2, 100.0 + 4.5 + need, 0.0, 20.0);
  const WorldView w(sc, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
  CHECK(std::abs(eval_predicate("keeps_safe_distance_prec", w, 1, 0, pp)) < 1e-9);
}

TEST_CASE("predicates: sign zone holds from the detection range") {
  Scenario sc = mini::empty_road(2, 3.5, 400.0, 2);
  sc.signs.push_back({SignKind::kNoOvertakingStart, 300.0, 1});
  const PredicateParams pp;
  auto at = [&](double s) {
    const WorldView w(sc, mini::constant_ego(0, 1, s, 3.5, 20.0));
    return eval_predicate("no_overtaking_sign", w, std::nullopt, 0, pp);
  };
  CHECK(at(240.0) < 0.0);
  CHECK(at(260.0) > 0.0);
  CHECK(at(350.0) > 0.0);
  CHECK(at(250.0) == doctest::Approx(0.0));
}

TEST_CASE("predicates: a slow platoon is congestion for its members") {
  Scenario sc = mini::empty_road(2, 3.5, 400.0, 2);
  for (int k = 0; k < 3; ++k) mini::add_vehicle(sc, k + 1, 0, 2, 100.0 + 15.0 * k, 3.5, 2.0);
  mini::add_vehicle(sc, 4, 0, 2, 200.0, 3.5, 2.0);
  const WorldView w(sc, mini::constant_ego(0, 1, 110.0, 0.0, 25.0));
  const PredicateParams pp;
  CHECK(eval_predicate("in_congestion", w, 2, 0, pp) > 0.0);
  CHECK(eval_predicate("in_congestion", w, 4, 0, pp) < 0.0);
}

TEST_CASE("rules: I6 vacuous without sign and compliant in the rightmost lane") {
  Scenario sc = mini::empty_road(3, 3.5, 400.0, 2);
  const RuleParams rp;
  {
    const WorldView w(sc, mini::constant_ego(0, 1, 280.0, 7.0, 20.0));
    CHECK(*rule_robustness(RuleId::kI6, w, 0, rp) > 0.0);
  }
  sc.signs.push_back({SignKind::kNoOvertakingStart, 300.0, 1});
  {
    const WorldView w(sc, mini::constant_ego(0, 1, 280.0, 0.3, 20.0));
    CHECK(*rule_robustness(RuleId::kI6, w, 0, rp) == doctest::Approx(1.45));
  }
  {
    const WorldView w(sc, mini::constant_ego(0, 1, 280.0, 7.0, 20.0));
    CHECK(*rule_robustness(RuleId::kI6, w, 0, rp) < 0.0);
  }
}

TEST_CASE("rules: I2 with empty left lanes is the capped positive value") {
  Scenario sc = mini::empty_road(3, 3.5, 400.0, 2);
  mini::add_vehicle(sc, 1, 0, 2, 150.0, 0.0, 15.0);
  const WorldView w(sc, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
  const RuleParams rp;
  CHECK(*rule_robustness(RuleId::kI2, w, 0, rp) > 0.0);
  const Scenario none = mini::empty_road(3, 3.5, 400.0, 2);
  const WorldView e(none, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
  CHECK(*rule_robustness(RuleId::kI2, e, 0, rp) == st::kCap);
}

TEST_CASE("rules: G1 violation disappears right after a cut-in") {
  Scenario sc = mini::empty_road(2, 3.5, 400.0, 40);
  // Vehicle 1 cuts into the ego lane 5.5 m ahead around step 7.
  mini::add_vehicle(sc, 1, 0, 40, 110.0, 4.0, 25.0, -2.0);
  const WorldView w(sc, mini::constant_ego(0, 40, 100.0, 0.0, 25.0));
  const RuleParams rp;
  const auto series = rule_series(RuleId::kG1, w, rp);
  bool saw_excuse = false;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const bool same = eval_predicate("in_same_lane", w, 1, i, rp) > 0;
    const bool unsafe = eval_predicate("keeps_safe_distance_prec", w, 1, i, rp) < 0;
    if (same && unsafe) {
      REQUIRE(series[i].has_value());
      saw_excuse = saw_excuse || *series[i] > 0;
    }
    CHECK(series[i].has_value() == true);
    CHECK((*series[i] > 0) == *oracle::rule_holds(RuleId::kG1, w, i, rp));
  }
  CHECK(saw_excuse);
}

TEST_CASE("rule book: hierarchy and tie-break") {
  const Verdict compliant = make_verdict({1.0, 1.0, 1.0});
  const Verdict better = make_verdict({3.0, 2.0, 1.0});
  const Verdict g1 = make_verdict({-0.1, 5.0, 5.0});
  const Verdict i6 = make_verdict({5.0, -0.1, 5.0});
  const Verdict i2 = make_verdict({5.0, 5.0, -0.1});
  const Verdict all = make_verdict({-1.0, -1.0, -1.0});
  CHECK(ranks_before(better, compliant));
  CHECK_FALSE(ranks_before(compliant, better));
  CHECK(ranks_before(compliant, all));
  CHECK(ranks_before(i2, i6));
  CHECK(ranks_before(i6, g1));
  CHECK(ranks_before(i2, g1));
  CHECK_FALSE(ranks_before(g1, i2));
  CHECK(make_verdict({st::kCap, st::kCap, st::kCap}).tie_break == doctest::Approx(30.0));
}

TEST_CASE("rules: names round trip") {
  for (RuleId r : kRules) CHECK(rule_from_string(to_string(r)) == r);
  CHECK(rule_from_string("g1") == RuleId::kG1);
  CHECK_THROWS_AS(rule_from_string("R_X9"), LookupError);
}

TEST_CASE("rules: sign consistency on a small random sample") {
  Rng rng = make_rng(5, "mini");
  const RuleParams rp;
  int checked = 0;
  for (int k = 0; k < 50; ++k) {
    const mini::World mw = mini::random_world(rng);
    const WorldView w(mw.scenario, mw.ego);
    for (RuleId r : kRules) {
      const auto series = rule_series(r, w, rp);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto truth = oracle::rule_holds(r, w, i, rp);
        REQUIRE(truth.has_value());
        REQUIRE(series[i].has_value());
        CHECK((*series[i] > 0) == *truth);
        ++checked;
      }
    }
  }
  CHECK(checked == 50 * 3 * 40);
}
