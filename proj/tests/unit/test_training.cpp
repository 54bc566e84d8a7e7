#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mini_world.hpp"
#include "oracles.hpp"
#include "rh/collision.hpp"
#include "rh/environment.hpp"
#include "rh/error.hpp"
#include "rh/metrics.hpp"
#include "rh/rewards.hpp"
#include "rh/synthetic.hpp"
#include "rh/trainer.hpp"

using namespace rh;

namespace {

NetShape tiny_net() {
  NetShape s;
  s.hidden = 8;
  s.layers = 2;
  s.embed = 8;
  s.head = {16, 8};
  return s;
}

Transition step_with(double reward, bool done, int episode) {
  Transition t;
  t.reward = reward;
  t.done = done;
  t.episode = episode;
  return t;
}

}  // namespace

TEST_CASE("progression reward") {
  const double L = 200.0;
  CHECK(reward_progression(100.0, 100.0, L) == doctest::Approx(2.0));
  CHECK(reward_progression(0.0, 0.0, L) == 0.0);
  const double full = reward_progression(L - 1.5, L, L);
  for (double s1 = 1.5; s1 < L; s1 += 0.5) CHECK(reward_progression(s1 - 1.5, s1, L) <= full + 1e-12);
  CHECK(full == doctest::Approx(8.0));
}

TEST_CASE("rule reward: vacuous I6, G1 boundary, empty left lane for I2") {
  const RuleParams rules;
  {
    Scenario sc = mini::empty_road(3, 3.5, 400.0, 30);
    const WorldView w(sc, mini::constant_ego(0, 30, 50.0, 7.0, 20.0));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(reward_rule(RuleId::kI6, w, i, rules).value > 0.0);
  }
  {
    Scenario sc = mini::empty_road(3, 3.5, 400.0, 2);
    const double gap = safe_distance(25.0, 25.0, rules);
    mini::add_vehicle(sc, 1, 0, 2, 100.0 + 4.5 + gap, 0.0, 25.0);
    const WorldView w(sc, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
    CHECK(std::abs(reward_rule(RuleId::kG1, w, 0, rules).value) < 1e-9);
  }
  {
    Scenario sc = mini::empty_road(3, 3.5, 400.0, 2);
    const WorldView empty(sc, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
    CHECK(reward_rule(RuleId::kI2, empty, 0, rules).value == doctest::Approx(100.0));
    mini::add_vehicle(sc, 1, 0, 2, 140.0, 0.0, 20.0);
    const WorldView w(sc, mini::constant_ego(0, 1, 100.0, 0.0, 25.0));
    REQUIRE(oracle::rule_holds(RuleId::kI2, w, 0, rules).value());
    const double r = reward_rule(RuleId::kI2, w, 0, rules).value;
    CHECK(r > 0.0);
    CHECK(r <= 100.0);
  }
}

TEST_CASE("discounted returns") {
  const std::vector<double> r = {1.0, 1.0, 1.0};
  const auto g = discounted_returns(r, 0.99);
  CHECK(g[0] == doctest::Approx(2.9701));
  CHECK(g[1] == doctest::Approx(1.99));
  CHECK(g[2] == doctest::Approx(1.0));
  const auto zero = discounted_returns(std::vector<double>{0, 0, 0}, 0.99);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double x) { return x == 0.0; }));
  CHECK(discounted_returns(r, 0.99, 5.0)[2] == doctest::Approx(1.0 + 0.99 * 5.0));

  Rng rng = make_rng(3, "returns");
  for (int k = 0; k < 50; ++k) {
    std::vector<double> rewards(1 + uniform_index(rng, 30));
    for (double& x : rewards) x = uniform(rng, -10, 10);
    const double boot = uniform(rng, -50, 50);
    const auto fast = discounted_returns(rewards, 0.97, boot);
    const auto slow = oracle::brute_returns(rewards, 0.97, boot);
    for (std::size_t i = 0; i < rewards.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
  }
}

TEST_CASE("buffer returns restart per episode and bootstrap the open tail") {
  RolloutBuffer buf;
  buf.transitions = {step_with(1, false, 0), step_with(1, true, 0), step_with(2, false, 1),
                     step_with(2, false, 1)};
  buf.bootstrap = 10.0;
  const auto g = compute_returns(buf, 0.5);
  CHECK(g[0] == doctest::Approx(1.5));
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(g[3] == doctest::Approx(2.0 + 0.5 * 10.0));
  CHECK(g[2] == doctest::Approx(2.0 + 0.5 * g[3]));
}

TEST_CASE("explained variance") {
  const std::vector<double> g = {1, 2, 3, 4};
  CHECK(*explained_variance(g, g) == doctest::Approx(1.0));
  CHECK(*explained_variance(g, std::vector<double>(4, 2.5)) == doctest::Approx(0.0));
  CHECK(*explained_variance(g, std::vector<double>{1, 2, 2, 4}) == doctest::Approx(0.85));
  CHECK_FALSE(explained_variance(std::vector<double>{1}, std::vector<double>{1}).has_value());
  CHECK_FALSE(explained_variance(std::vector<double>{2, 2}, std::vector<double>{1, 3}).has_value());
  Rng rng = make_rng(4, "ev");
  for (int k = 0; k < 20; ++k) {
    std::vector<double> t(10), p(10);
    for (auto& x : t) x = uniform(rng, -5, 5);
    for (auto& x : p) x = uniform(rng, -5, 5);
    CHECK(*explained_variance(t, p) == doctest::Approx(oracle::explained_variance(p, t)).epsilon(1e-12));
  }
}

TEST_CASE("episode reward mean") {
  const std::vector<std::vector<double>> one = {{2, 3}};
  CHECK(episode_reward_mean(one) == 5.0);
  const std::vector<std::vector<double>> two = {{1}, {3}};
  CHECK(episode_reward_mean(two) == 2.0);
  CHECK_THROWS_AS(episode_reward_mean(std::span<const std::vector<double>>{}), RangeError);
}

TEST_CASE("critic update: fixed point, constant targets, step count") {
  Rng rng = make_rng(1, "graphs");
  ValueNet net(tiny_net());
  net.initialize(3);
  TrafficGraph g;
  g.nodes = {{0.1, 0.0, 0.2, 1.0}};
  g.vehicle_ids = {kEgoId};
  g.ego.fill(0.25);

  {
    ValueNet same = net;
    AdamState opt;
    AdamParams no_decay;
    no_decay.weight_decay = 0.0;
    const std::vector<const TrafficGraph*> gs(4, &g);
    const std::vector<double> t(4, same.forward(g));
    const auto losses = update_critic(same, opt, gs, t, 1, 4, no_decay, rng);
    CHECK(losses[0] == 0.0);
    CHECK(std::equal(same.params().begin(), same.params().end(), net.params().begin()));
  }
  {
    ValueNet fit = net;
    AdamState opt;
    AdamParams adam;
    adam.lr = 1e-3;
    const std::vector<const TrafficGraph*> gs(32, &g);
    const std::vector<double> t(32, 0.7);
    update_critic(fit, opt, gs, t, 200, 32, adam, rng);
    CHECK(opt.step == 200);
    CHECK(std::abs(fit.forward(g) - 0.7) < 1e-2);
  }
  {
    ValueNet count = net;
    AdamState opt;
    const std::vector<const TrafficGraph*> gs(256, &g);
    const std::vector<double> t(256, 1.0);
    update_critic(count, opt, gs, t, 8, 32, AdamParams{}, rng);
    CHECK(opt.step == 64);
  }
}

TEST_CASE("episode: cruise, early goal and termination order") {
  Scenario sc = mini::empty_road(3, 3.5, 400.0, 300);
  sc.ego.goal_s = 400.0;
  const ScenarioContext ctx(sc);
  EnvParams env;
  env.weights.value = 0.0;
  {
    Episode ep(ctx, RuleId::kI6, env, {200.0, 0, 20.0, 0}, 0);
    const auto tr = ep.advance(nullptr, 100);
    CHECK(tr.size() == 5);
    CHECK(std::none_of(tr.begin(), tr.end(), [](const Transition& t) { return t.done; }));
    CHECK(tr.back().step == 5);
    CHECK(tr.back().ego.s > 200.0);
  }
  {
    Episode ep(ctx, RuleId::kI6, env, {395.0, 0, 20.0, 0}, 1);
    const auto tr = ep.advance(nullptr, 100);
    CHECK(tr.size() < 5);
    CHECK(tr.back().done);
    CHECK(tr.back().reason == Termination::kGoal);
    CHECK(ep.finished());
    CHECK(ep.advance(nullptr, 100).empty());
  }

  // Constant-speed ego driving into a standing vehicle: first overlapping step.
  Scenario blocked = mini::empty_road(3, 3.5, 400.0, 100);
  mini::add_vehicle(blocked, 1, 0, 100, 150.0, 0.0, 0.0);
  const FrenetFrame f = blocked.lanes.frame(1);
  const auto ego = mini::constant_ego(0, 100, 100.0, 0.0, 20.0);
  const Traffic traffic(blocked, f, 0, 99);
  int first = -1;
  for (int k = 0; k < 100 && first < 0; ++k) {
    const auto& e = ego.states[static_cast<std::size_t>(k)];
    const auto& o = *traffic.find(1, k);
    // Axis-aligned rectangles on the same centre line.
    if (e.s + e.length / 2 > o.s - o.length / 2 && e.s - e.length / 2 < o.s + o.length / 2) first = k;
  }
  int reported = -1;
  for (int k = 0; k < 100 && reported < 0; ++k) {
    if (classify_state(ego.states[static_cast<std::size_t>(k)], traffic.at(k), f, 400.0, k, 100) ==
        Termination::kCollision) {
      reported = k;
    }
  }
  CHECK(first == 23);
  CHECK(reported == first);

  RoadState off = ego.states[0];
  off.d = 8.0;
  CHECK(classify_state(off, {}, f, 400.0, 0, 100) == Termination::kOffRoad);
  RoadState home = ego.states[0];
  home.s = 400.0;
  CHECK(classify_state(home, {}, f, 400.0, 99, 100) == Termination::kGoal);
  CHECK(classify_state(ego.states[0], {}, f, 400.0, 99, 100) == Termination::kScenarioEnd);
}

TEST_CASE("episode: planner failure ends the episode without a transition") {
  Scenario sc = mini::empty_road(1, 3.5, 400.0, 100);
  mini::add_vehicle(sc, 1, 0, 100, 207.0, 0.0, 0.0);
  const ScenarioContext ctx(sc);
  EnvParams env;
  env.weights.value = 0.0;
  Episode ep(ctx, RuleId::kG1, env, {200.0, 0, 20.0, 0}, 0);
  CHECK(ep.advance(nullptr, 5).empty());
  CHECK(ep.termination() == Termination::kPlannerFailure);
}

TEST_CASE("episode start sampling respects the window and clearance") {
  SyntheticSpec spec;
  spec.vehicles = 12;
  spec.duration = 30.0;
  const Scenario sc = generate_synthetic_scenario(spec, 2);
  const ScenarioContext ctx(sc);
  EnvParams env;
  Rng rng = make_rng(1, "episode");
  for (int k = 0; k < 50; ++k) {
    const auto st = sample_start(ctx, env, rng);
    REQUIRE(st.has_value());
    CHECK(st->s >= sc.ego.goal_s - 350.0);
    CHECK(st->s <= sc.ego.goal_s - 150.0);
    const RoadState ego =
        make_ego_state({st->s, st->speed, 0, ctx.frame.lane(st->lane).center, 0, 0}, 4.5, 1.8);
    for (const RoadState& o : ctx.traffic->at(0)) CHECK(keeps_clearance(ego, o, 3.0, 0.5));
  }
}

TEST_CASE("training: zero steps and determinism") {
  SyntheticSpec spec;
  spec.vehicles = 3;
  spec.duration = 20.0;
  const auto scenarios = generate_scenario_set(spec, 2, 9, true);
  TrainConfig cfg;
  cfg.net = tiny_net();
  cfg.seed = 4;
  cfg.total_steps = 0;
  const TrainResult none = train_phase(scenarios, cfg);
  CHECK(none.history.empty());
  ValueNet fresh(tiny_net());
  fresh.initialize(4);
  CHECK(parameter_hash(none.net) == parameter_hash(fresh));

  cfg.total_steps = 512;
  const TrainResult a = train_phase(scenarios, cfg);
  const TrainResult b = train_phase(scenarios, cfg);
  CHECK_FALSE(a.error.has_value());
  CHECK(a.history.size() == 2);
  CHECK(metrics_csv(a.history) == metrics_csv(b.history));
  CHECK(parameter_hash(a.net) == parameter_hash(b.net));
  cfg.seed = 5;
  CHECK(parameter_hash(train_phase(scenarios, cfg).net) != parameter_hash(a.net));
}

TEST_CASE("training configuration is validated") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(train_phase(std::span<const Scenario>{}, TrainConfig{}), ConfigError);
}
