#include "fpi/random_mdp.hpp"

#include <stdexcept>

namespace fpi {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::size_t>(rng() % span);
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TabularPolicy random_policy(std::mt19937_64& rng, std::size_t cells, std::size_t actions) {
    TabularPolicy pi = TabularPolicy::constant(cells, 0);
    for (std::size_t s = 0; s < cells; ++s) pi[s] = static_cast<ActionIndex>(uniform_index(rng, 0, actions - 1));
    return pi;
}

FiniteMdp random_mdp(std::uint64_t seed, const RandomMdpOptions& o) {
    if (o.min_cells < 1 || o.min_cells > o.max_cells || o.min_actions < 1 || o.min_actions > o.max_actions) {
        throw std::invalid_argument("random MDP: invalid size bounds");
    }
    std::mt19937_64 rng(seed);
    const std::size_t S = uniform_index(rng, o.min_cells, o.max_cells);
    const std::size_t A = uniform_index(rng, o.min_actions, o.max_actions);
    std::vector<CellIndex> succ(S * A);
    std::vector<double> rewards(S * A);
    std::vector<std::uint8_t> violating(S);
    for (std::size_t s = 0; s < S; ++s) {
        violating[s] = uniform_unit(rng) < o.hazard_probability ? 1 : 0;
        for (std::size_t a = 0; a < A; ++a) {
            succ[s * A + a] = static_cast<CellIndex>(uniform_index(rng, 0, S - 1));
            rewards[s * A + a] = -uniform_unit(rng);
        }
    }
    std::vector<CellIndex> initial;
    for (std::size_t s = 0; s < S; ++s) {
        if (!violating[s]) initial.push_back(static_cast<CellIndex>(s));
    }
    return FiniteMdp(S, A, std::move(succ), std::move(rewards), std::move(violating), o.gamma, std::move(initial));
}

}  // namespace fpi
