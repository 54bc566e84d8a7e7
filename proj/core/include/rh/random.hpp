#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rh {

// All stochastic components draw from mt19937_64 streams derived from one
// run seed. derive_seed(seed, tag) mixes the tag through FNV-1a and the
// result through splitmix64, so each component gets an independent stream:
//
//   synth        scenario generation (index appended: "synth/3")
//   sign         no-overtaking sign placement ("sign/3")
//   init         value network initialisation
//   episode      episode start sampling in training
//   shuffle      minibatch shuffling in critic updates
//   replay       start sampling for replay/evaluate
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
Rng make_rng(std::uint64_t seed, std::string_view tag);

// Portable uniform draws (the std distributions are implementation-defined).
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
void shuffle(Rng& rng, std::span<std::size_t> values);

}  // namespace rh
