#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rh {

struct AdamParams {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;  // decoupled
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam step with decoupled weight decay:
// p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
// Throws TrainingError on a non-finite gradient, leaving params untouched.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& opt = {});

}  // namespace rh
