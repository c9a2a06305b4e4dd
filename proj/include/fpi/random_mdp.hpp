#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "fpi/mdp.hpp"

namespace fpi {

struct RandomMdpOptions {
    std::size_t min_cells = 1;
    std::size_t max_cells = 12;
    std::size_t min_actions = 1;
    std::size_t max_actions = 4;
    double hazard_probability = 0.25;
    double gamma = kDefaultDiscount;
};

/// Uniform successors, rewards in [-1, 0], independent hazard flags.
///
/// Sampling uses the raw 64-bit engine output with fixed arithmetic
/// (no std distributions) so a seed names the same MDP on every platform.
FiniteMdp random_mdp(std::uint64_t seed, const RandomMdpOptions& options = {});

/// Uniformly random deterministic policy from the same engine scheme.
TabularPolicy random_policy(std::mt19937_64& rng, std::size_t cells, std::size_t actions);

/// Uniform integer in [lo, hi].
std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi);
/// Uniform real in [0, 1).
double uniform_unit(std::mt19937_64& rng);

}  // namespace fpi
