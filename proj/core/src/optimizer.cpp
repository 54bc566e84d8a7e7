#include "rh/optimizer.hpp"

#include <cmath>

#include <fmt/core.h>

#include "rh/error.hpp"

namespace rh {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& opt) {
  if (params.size() != grads.size()) throw ParameterError("gradient and parameter sizes differ");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError(fmt::format("non-finite gradient at parameter {} (step {})", i,
                                      state.step + 1));
    }
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * g;
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * g * g;
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params[i] -= opt.lr * (mh / (std::sqrt(vh) + opt.eps) + opt.weight_decay * params[i]);
  }
}

}  // namespace rh
