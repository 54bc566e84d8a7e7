#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rh/environment.hpp"
#include "rh/optimizer.hpp"
#include "rh/value_net.hpp"

namespace rh {

struct TrainConfig {
  RuleId phase = RuleId::kI6;
  int total_steps = 2000;
  int rollout_steps = 256;
  int epochs = 8;
  int batch_size = 32;
  double gamma = 0.99;
  AdamParams adam;
  NetShape net;
  EnvParams env;
  std::uint64_t seed = 0;
  int max_planner_failures = 3;  // per scenario before it is skipped
  int reward_window = 100;       // completed episodes in the reward mean

  void validate() const;  // throws ConfigError
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  // Value of the state after the last transition when that segment was
  // cut by the buffer boundary rather than finished.
  std::optional<double> bootstrap;
  std::uint64_t snapshot = 0;  // hash of the parameters that produced it
};

// Return-to-go per transition. Each episode segment restarts the
// recursion; the trailing open segment bootstraps from buffer.bootstrap.
std::vector<double> compute_returns(const RolloutBuffer& buffer, double gamma);

// Minibatch MSE regression of V(graph) onto targets, shuffled per epoch.
// Returns the mean minibatch loss of each epoch. Throws TrainingError on a
// non-finite loss; the parameters then hold the last finite state.
std::vector<double> update_critic(ValueNet& net, AdamState& opt,
                                  std::span<const TrafficGraph* const> graphs,
                                  std::span<const double> targets, int epochs, int batch_size,
                                  const AdamParams& adam, Rng& rng);

std::uint64_t parameter_hash(const ValueNet& net);

struct RoundMetrics {
  int round = 0;
  std::optional<double> explained_variance;
  std::optional<double> episode_reward_mean;
  double mean_loss = 0.0;
  int episodes = 0;  // completed so far
};

struct EpisodeLog {
  int id = 0;
  int scenario = 0;
  double total_reward = 0.0;
  double total_rule = 0.0;
  double total_progression = 0.0;
  int steps = 0;
  Termination reason = Termination::kNone;
};

struct TrainResult {
  ValueNet net;
  std::vector<RoundMetrics> history;
  std::vector<EpisodeLog> episodes;
  std::vector<int> skipped_scenarios;
  std::optional<std::string> error;  // set when training aborted early
};

using RoundCallback = std::function<void(const RoundMetrics&)>;

TrainResult train_phase(std::span<const Scenario> scenarios, const TrainConfig& config,
                        const RoundCallback& on_round = {});

std::string metrics_csv(std::span<const RoundMetrics> history);

}  // namespace rh
