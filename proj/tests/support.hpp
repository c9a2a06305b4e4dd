#pragma once

// Reference computations for the tests. Written against the FiniteMdp
// accessors only, sharing no code with the library's solvers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fpi/mdp.hpp"

namespace fpi::testing {

/// Build an MDP from a successor table and a hazard list; rewards default
/// to zero.
inline FiniteMdp table_mdp(std::size_t cells, std::size_t actions, const std::vector<CellIndex>& successors,
                           const std::vector<std::size_t>& hazards, std::vector<double> rewards = {},
                           double gamma = 0.99) {
    std::vector<std::uint8_t> violating(cells, 0);
    for (std::size_t h : hazards) violating[h] = 1;
    if (rewards.empty()) rewards.assign(cells * actions, 0.0);
    return FiniteMdp(cells, actions, successors, std::move(rewards), std::move(violating), gamma);
}

/// Steps until a violating cell is entered, by walking the policy for at
/// most cells + 1 steps. A deterministic walk that survives that long is
/// in a cycle of safe cells.
inline std::int64_t walk_steps(const FiniteMdp& mdp, const std::vector<ActionIndex>& policy, std::size_t start) {
    std::size_t s = start;
    for (std::size_t n = 0; n <= mdp.cell_count(); ++n) {
        if (mdp.violates(s)) return static_cast<std::int64_t>(n);
        s = static_cast<std::size_t>(mdp.successor(s, static_cast<std::size_t>(policy[s])));
    }
    return -1;
}

inline std::vector<double> walk_cdf(const FiniteMdp& mdp, const std::vector<ActionIndex>& policy) {
    std::vector<double> f(mdp.cell_count());
    for (std::size_t s = 0; s < f.size(); ++s) {
        const std::int64_t n = walk_steps(mdp, policy, s);
        f[s] = n < 0 ? 0.0 : std::pow(mdp.gamma(), static_cast<double>(n));
    }
    return f;
}

/// Pointwise minimum of walk_cdf over all A^S policies.
inline std::vector<double> brute_force_optimal_cdf(const FiniteMdp& mdp) {
    const std::size_t S = mdp.cell_count(), A = mdp.action_count();
    std::vector<double> best(S, std::numeric_limits<double>::infinity());
    std::vector<ActionIndex> policy(S, 0);
    while (true) {
        const auto f = walk_cdf(mdp, policy);
        for (std::size_t s = 0; s < S; ++s) best[s] = std::min(best[s], f[s]);
        std::size_t i = 0;
        while (i < S && static_cast<std::size_t>(++policy[i]) == A) policy[i++] = 0;
        if (i == S) break;
    }
    return best;
}

/// Union of every subset of safe cells in which each cell has an action
/// staying inside the subset. Exponential; meant for at most ~14 cells.
inline std::vector<std::uint8_t> brute_force_kernel(const FiniteMdp& mdp) {
    const std::size_t S = mdp.cell_count(), A = mdp.action_count();
    std::vector<std::uint8_t> kernel(S, 0);
    for (std::uint64_t subset = 1; subset < (std::uint64_t{1} << S); ++subset) {
        auto in = [&](std::size_t s) { return (subset >> s) & 1u; };
        bool closed = true;
        for (std::size_t s = 0; s < S && closed; ++s) {
            if (!in(s)) continue;
            if (mdp.violates(s)) { closed = false; break; }
            bool any = false;
            for (std::size_t a = 0; a < A && !any; ++a) any = in(static_cast<std::size_t>(mdp.successor(s, a)));
            closed = any;
        }
        if (!closed) continue;
        for (std::size_t s = 0; s < S; ++s) kernel[s] |= static_cast<std::uint8_t>(in(s));
    }
    return kernel;
}

/// (I - gamma P_pi) V = r_pi on safe cells, V = 0 on violating cells.
inline std::vector<double> linear_policy_value(const FiniteMdp& mdp, const std::vector<ActionIndex>& policy) {
    const std::size_t S = mdp.cell_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    for (std::size_t s = 0; s < S; ++s) {
        if (mdp.violates(s)) continue;
        const auto a = static_cast<std::size_t>(policy[s]);
        m(static_cast<Eigen::Index>(s), mdp.successor(s, a)) -= mdp.gamma();
        r(static_cast<Eigen::Index>(s)) = mdp.reward(s, a);
    }
    const Eigen::VectorXd v = m.fullPivLu().solve(r);
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace fpi::testing
