#include "rh/metrics.hpp"

#include "rh/error.hpp"

namespace rh {
namespace {

double variance(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

}  // namespace

std::optional<double> explained_variance(std::span<const double> targets,
                                         std::span<const double> predictions) {
  if (targets.size() != predictions.size()) {
    throw ParameterError("targets and predictions differ in length");
  }
  if (targets.size() < 2) return std::nullopt;
  const double vt = variance(targets);
  if (!(vt > 0.0)) return std::nullopt;
  std::vector<double> diff(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) diff[i] = targets[i] - predictions[i];
  return 1.0 - variance(diff) / vt;
}

double episode_reward_mean(std::span<const std::vector<double>> episodes) {
  if (episodes.empty()) throw RangeError("episode reward mean needs at least one episode");
  double acc = 0.0;
  for (const auto& e : episodes) {
    double total = 0.0;
    for (double r : e) total += r;
    acc += total;
  }
  return acc / static_cast<double>(episodes.size());
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma,
                                       double bootstrap) {
  std::vector<double> out(rewards.size());
  double g = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    g = rewards[i] + gamma * g;
    out[i] = g;
  }
  return out;
}

}  // namespace rh
