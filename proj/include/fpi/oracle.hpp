#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fpi/mdp.hpp"

namespace fpi {

/// Steps-to-violation of a rollout, or kNeverViolates.
using StepCount = std::int64_t;
inline constexpr StepCount kNeverViolates = std::numeric_limits<StepCount>::max();

struct OracleResult {
    RegionMask kernel;
    std::vector<StepCount> steps_to_violation;  ///< under the audited policy
    std::optional<TabularField> optimal_cdf;    ///< only for enumerable MDPs
};

/// Greatest subset of the constrained set in which every cell has an
/// action whose successor stays in the subset.
RegionMask viability_kernel(const FiniteMdp& mdp);

/// First t with c(x_t) = 1 along the deterministic rollout, or
/// kNeverViolates once a cycle of safe cells is entered. `cap` bounds the
/// simulation only as a fallback, since cycle detection resolves every
/// rollout within S steps.
StepCount rollout_steps_to_violation(const FiniteMdp& mdp, const TabularPolicy& policy, std::size_t cell,
                                     std::size_t cap);

std::vector<StepCount> steps_to_violation(const FiniteMdp& mdp, const TabularPolicy& policy);

/// gamma^N per cell, 0 when N is infinite.
TabularField cdf_from_steps(const FiniteMdp& mdp, const std::vector<StepCount>& steps);

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1000000;

/// Pointwise minimum over all A^S deterministic policies of their exact
/// rollout CDF. Throws std::length_error when A^S exceeds `budget`.
TabularField enumerate_optimal_cdf(const FiniteMdp& mdp, std::uint64_t budget = kDefaultEnumerationBudget);

OracleResult run_oracle(const FiniteMdp& mdp, const TabularPolicy& policy, bool enumerate);

/// Cells of `from` whose `horizon`-step rollout under `policy` reaches a
/// violating cell.
std::vector<std::size_t> unsafe_rollout_starts(const FiniteMdp& mdp, const TabularPolicy& policy,
                                               const RegionMask& from, std::size_t horizon);

}  // namespace fpi
