#include "rh/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>

#include <fmt/core.h>

#include "rh/error.hpp"
#include "rh/metrics.hpp"

namespace rh {

void TrainConfig::validate() const {
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (rollout_steps < 1 || epochs < 1 || batch_size < 1) {
    throw ConfigError("rollout_steps, epochs and batch_size must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(adam.lr > 0.0) || adam.weight_decay < 0.0) throw ConfigError("bad optimizer settings");
  if (max_planner_failures < 1 || reward_window < 1) {
    throw ConfigError("max_planner_failures and reward_window must be positive");
  }
  env.planner.validate();
  net.validate();
}

std::vector<double> compute_returns(const RolloutBuffer& buffer, double gamma) {
  const auto& tr = buffer.transitions;
  std::vector<double> out(tr.size());
  double g = 0.0;
  for (std::size_t i = tr.size(); i-- > 0;) {
    const bool segment_end = i + 1 == tr.size() || tr[i + 1].episode != tr[i].episode;
    if (tr[i].done) {
      g = 0.0;
    } else if (segment_end) {
      g = i + 1 == tr.size() && buffer.bootstrap ? *buffer.bootstrap : 0.0;
    }
    g = tr[i].reward + gamma * g;
    out[i] = g;
  }
  return out;
}

std::vector<double> update_critic(ValueNet& net, AdamState& opt,
                                  std::span<const TrafficGraph* const> graphs,
                                  std::span<const double> targets, int epochs, int batch_size,
                                  const AdamParams& adam, Rng& rng) {
  if (graphs.size() != targets.size()) throw ParameterError("graphs and targets differ in length");
  std::vector<double> losses;
  if (graphs.empty()) return losses;
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(net.size());
  for (int e = 0; e < epochs; ++e) {
    shuffle(rng, order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(batch_size)) {
      const std::size_t end = std::min(order.size(), b + static_cast<std::size_t>(batch_size));
      const double inv = 1.0 / static_cast<double>(end - b);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t k = b; k < end; ++k) {
        const std::size_t i = order[k];
        const double v = net.forward(*graphs[i]);
        const double r = v - targets[i];
        loss += r * r * inv;
        net.backward(*graphs[i], 2.0 * r * inv, grad);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError(fmt::format("non-finite loss in epoch {} batch {}", e, batches));
      }
      adam_step(net.params(), grad, opt, adam);
      epoch_loss += loss;
      ++batches;
    }
    losses.push_back(epoch_loss / batches);
  }
  return losses;
}

std::uint64_t parameter_hash(const ValueNet& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (double p : net.params()) mix(std::bit_cast<std::uint64_t>(p));
  mix(std::bit_cast<std::uint64_t>(net.output_offset()));
  mix(std::bit_cast<std::uint64_t>(net.output_scale()));
  return h;
}

TrainResult train_phase(std::span<const Scenario> scenarios, const TrainConfig& cfg,
                        const RoundCallback& on_round) {
  cfg.validate();
  if (scenarios.empty()) throw ConfigError("training needs at least one scenario");
  TrainResult result{ValueNet(cfg.net), {}, {}, {}, std::nullopt};
  ValueNet& net = result.net;
  net.initialize(cfg.seed);
  if (cfg.total_steps == 0) return result;

  std::vector<std::unique_ptr<ScenarioContext>> contexts;
  for (const Scenario& s : scenarios) contexts.push_back(std::make_unique<ScenarioContext>(s));
  std::vector<int> failures(scenarios.size(), 0);
  std::vector<char> skipped(scenarios.size(), 0);

  Rng episode_rng = make_rng(cfg.seed, "episode");
  Rng shuffle_rng = make_rng(cfg.seed, "shuffle");
  AdamState opt;

  int next_episode = 0;
  int scenario_cursor = 0;
  std::unique_ptr<Episode> episode;
  std::size_t episode_scenario = 0;
  EpisodeLog log;
  std::deque<double> recent;
  bool affine_set = false;

  auto open_episode = [&]() -> bool {
    for (std::size_t tries = 0; tries < 4 * scenarios.size(); ++tries) {
      const auto idx = static_cast<std::size_t>(scenario_cursor++ % static_cast<int>(scenarios.size()));
      if (skipped[idx]) continue;
      const auto st = sample_start(*contexts[idx], cfg.env, episode_rng);
      if (!st) continue;
      episode = std::make_unique<Episode>(*contexts[idx], cfg.phase, cfg.env, *st, next_episode++);
      episode_scenario = idx;
      log = EpisodeLog{episode->id(), static_cast<int>(idx), 0.0, 0.0, 0.0, 0, Termination::kNone};
      return true;
    }
    return false;
  };

  const int rounds = (cfg.total_steps + cfg.rollout_steps - 1) / cfg.rollout_steps;
  int remaining = cfg.total_steps;
  for (int round = 1; round <= rounds; ++round) {
    const int capacity = std::min(cfg.rollout_steps, remaining);
    remaining -= capacity;
    RolloutBuffer buffer;
    buffer.snapshot = parameter_hash(net);
    std::vector<double> predictions;

    while (static_cast<int>(buffer.transitions.size()) < capacity) {
      if (!episode || episode->finished()) {
        if (!open_episode()) {
          result.error = "no scenario yields a valid episode start";
          return result;
        }
      }
      GraphCritic critic(net, *contexts[episode_scenario], cfg.env.graph);
      const int room = capacity - static_cast<int>(buffer.transitions.size());
      auto steps = episode->advance(cfg.env.weights.value != 0.0 ? &critic : nullptr, room);
      if (episode->termination() == Termination::kPlannerFailure) {
        if (!buffer.transitions.empty() && buffer.transitions.back().episode == episode->id()) {
          buffer.transitions.back().done = true;
          buffer.transitions.back().reason = Termination::kPlannerFailure;
        }
        if (++failures[episode_scenario] >= cfg.max_planner_failures && !skipped[episode_scenario]) {
          skipped[episode_scenario] = 1;
          result.skipped_scenarios.push_back(static_cast<int>(episode_scenario));
        }
        if (log.steps > 0) {
          log.reason = Termination::kPlannerFailure;
          result.episodes.push_back(log);
          recent.push_back(log.total_reward);
        }
      }
      for (Transition& t : steps) {
        predictions.push_back(net.forward(t.graph));
        log.total_reward += t.reward;
        log.total_rule += t.reward_rule;
        log.total_progression += t.reward_progression;
        ++log.steps;
        if (t.done) {
          log.reason = t.reason;
          result.episodes.push_back(log);
          recent.push_back(log.total_reward);
        }
        buffer.transitions.push_back(std::move(t));
      }
      while (static_cast<int>(recent.size()) > cfg.reward_window) recent.pop_front();
    }
    if (!buffer.transitions.back().done && episode && !episode->finished()) {
      buffer.bootstrap = net.forward(episode->graph_now());
    }

    const auto targets = compute_returns(buffer, cfg.gamma);
    if (!affine_set) {
      // Fix the output scale to the first batch of returns.
      const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / targets.size();
      double var = 0.0;
      for (double t : targets) var += (t - mean) * (t - mean);
      const double sd = std::sqrt(var / targets.size());
      net.set_output_affine(mean, sd > 1e-9 ? sd : 1.0);
      affine_set = true;
    }
    std::vector<const TrafficGraph*> graphs;
    for (const Transition& t : buffer.transitions) graphs.push_back(&t.graph);

    RoundMetrics m;
    m.round = round;
    m.explained_variance = explained_variance(targets, predictions);
    if (!recent.empty()) {
      m.episode_reward_mean =
          std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(recent.size());
    }
    m.episodes = static_cast<int>(result.episodes.size());
    const std::vector<double> backup(net.params().begin(), net.params().end());
    try {
      const auto losses =
          update_critic(net, opt, graphs, targets, cfg.epochs, cfg.batch_size, cfg.adam, shuffle_rng);
      m.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) / losses.size();
    } catch (const TrainingError& e) {
      std::copy(backup.begin(), backup.end(), net.params().begin());
      result.error = e.what();
      return result;
    }
    result.history.push_back(m);
    if (on_round) on_round(m);
  }
  return result;
}

std::string metrics_csv(std::span<const RoundMetrics> history) {
  std::string out = "update_round,explained_variance,episode_reward_mean,mean_loss\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.9g}", *v) : std::string("nan");
  };
  for (const RoundMetrics& m : history) {
    out += fmt::format("{},{},{},{:.9g}\n", m.round, opt(m.explained_variance),
                       opt(m.episode_reward_mean), m.mean_loss);
  }
  return out;
}

}  // namespace rh
