#pragma once

#include <optional>
#include <span>
#include <vector>

namespace rh {

// 1 - Var(targets - predictions) / Var(targets), population variances.
// nullopt when fewer than two samples or the targets have zero variance.
std::optional<double> explained_variance(std::span<const double> targets,
                                         std::span<const double> predictions);

// Mean over episodes of the summed per-step rewards. Throws RangeError
// without episodes.
double episode_reward_mean(std::span<const std::vector<double>> episodes);

// Discounted return-to-go: G_t = r_t + gamma * G_{t+1}, G_n = bootstrap.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma,
                                       double bootstrap = 0.0);

}  // namespace rh
