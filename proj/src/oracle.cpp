#include "fpi/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fpi {

RegionMask viability_kernel(const FiniteMdp& mdp) {
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const std::size_t A = mdp.action_count();
    RegionMask kernel = constraint_indicator(mdp);
    RegionMask next = kernel;
    for (;;) {
        bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::int64_t s = 0; s < S; ++s) {
            if (!kernel.members[s]) {
                next.members[s] = 0;
                continue;
            }
            bool keep = false;
            for (std::size_t a = 0; a < A && !keep; ++a) keep = kernel.members[mdp.successor(s, a)] != 0;
            next.members[s] = keep ? 1 : 0;
            changed = changed || !keep;
        }
        kernel.members.swap(next.members);
        if (!changed) return kernel;
    }
}

StepCount rollout_steps_to_violation(const FiniteMdp& mdp, const TabularPolicy& policy, std::size_t cell,
                                     std::size_t cap) {
    // visit stamp per cell; revisiting a cell means the rollout is periodic
    std::vector<std::uint8_t> visited(mdp.cell_count(), 0);
    std::size_t x = cell;
    for (std::size_t t = 0; t <= cap; ++t) {
        if (mdp.violates(x)) return static_cast<StepCount>(t);
        if (visited[x]) return kNeverViolates;
        visited[x] = 1;
        x = static_cast<std::size_t>(mdp.successor(x, policy[x]));
    }
    return kNeverViolates;
}

std::vector<StepCount> steps_to_violation(const FiniteMdp& mdp, const TabularPolicy& policy) {
    mdp.check_policy(policy);
    const std::size_t S = mdp.cell_count();
    // Memoized walk: each cell's count is resolved once along its path.
    constexpr StepCount kUnknown = -1;
    constexpr StepCount kOnStack = -2;
    std::vector<StepCount> steps(S, kUnknown);
    std::vector<std::size_t> path;
    for (std::size_t start = 0; start < S; ++start) {
        if (steps[start] != kUnknown) continue;
        path.clear();
        std::size_t x = start;
        StepCount tail;
        for (;;) {
            if (steps[x] == kOnStack) {
                tail = kNeverViolates;  // safe cycle
                break;
            }
            if (steps[x] != kUnknown) {
                tail = steps[x];
                break;
            }
            if (mdp.violates(x)) {
                steps[x] = 0;
                tail = 0;
                break;
            }
            steps[x] = kOnStack;
            path.push_back(x);
            x = static_cast<std::size_t>(mdp.successor(x, policy[x]));
        }
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            tail = tail == kNeverViolates ? kNeverViolates : tail + 1;
            steps[*it] = tail;
        }
    }
    return steps;
}

TabularField cdf_from_steps(const FiniteMdp& mdp, const std::vector<StepCount>& steps) {
    TabularField f = TabularField::filled(FieldKind::Cdf, steps.size(), 0.0);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        f[s] = steps[s] == kNeverViolates ? 0.0 : std::pow(mdp.gamma(), static_cast<double>(steps[s]));
    }
    return f;
}

TabularField enumerate_optimal_cdf(const FiniteMdp& mdp, std::uint64_t budget) {
    const std::size_t S = mdp.cell_count();
    const std::size_t A = mdp.action_count();
    std::uint64_t total = 1;
    for (std::size_t s = 0; s < S; ++s) {
        if (total > budget / A) {
            throw std::length_error("policy enumeration: A^S exceeds the budget of " + std::to_string(budget));
        }
        total *= A;
    }

    TabularField best = TabularField::filled(FieldKind::Cdf, S, 1.0);
    TabularPolicy policy = TabularPolicy::constant(S, 0);
    for (std::uint64_t n = 0; n < total; ++n) {
        std::uint64_t code = n;
        for (std::size_t s = 0; s < S; ++s) {
            policy[s] = static_cast<ActionIndex>(code % A);
            code /= A;
        }
        const TabularField f = cdf_from_steps(mdp, steps_to_violation(mdp, policy));
        for (std::size_t s = 0; s < S; ++s) best[s] = std::min(best[s], f[s]);
    }
    return best;
}

OracleResult run_oracle(const FiniteMdp& mdp, const TabularPolicy& policy, bool enumerate) {
    OracleResult out{viability_kernel(mdp), steps_to_violation(mdp, policy), std::nullopt};
    if (enumerate) out.optimal_cdf = enumerate_optimal_cdf(mdp);
    return out;
}

std::vector<std::size_t> unsafe_rollout_starts(const FiniteMdp& mdp, const TabularPolicy& policy,
                                               const RegionMask& from, std::size_t horizon) {
    mdp.check_policy(policy);
    std::vector<std::size_t> bad;
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        if (!from.contains(s)) continue;
        std::size_t x = s;
        for (std::size_t t = 0; t <= horizon; ++t) {
            if (mdp.violates(x)) {
                bad.push_back(s);
                break;
            }
            x = static_cast<std::size_t>(mdp.successor(x, policy[x]));
        }
    }
    return bad;
}

}  // namespace fpi
