#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fpi {

struct VerificationOptions {
    std::uint64_t seed = 1;
    std::size_t count = 100;
    std::size_t max_cells = 12;
    std::size_t max_actions = 4;
    double gamma = 0.99;
    double p = 0.1;
    double eps_fp = 1e-12;
    double eps_v = 1e-10;
    double tie_tolerance = 1e-9;
    std::size_t sampled_policies = 100;
    /// Negative control: perturb every computed policy CDF before the
    /// self-consistency check.
    bool corrupt_cdf = false;
    /// Where the first failing MDP is written; empty disables the dump.
    std::string dump_dir;
};

struct CheckTally {
    std::string name;
    std::string property;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::string first_failure;
};

struct VerificationSummary {
    std::vector<CheckTally> checks;
    std::size_t mdps = 0;
    std::optional<std::string> failure_artifact;

    bool all_passed() const;
};

/// Runs every invariant check on `count` random MDPs whose seeds are
/// seed, seed + 1, ...
VerificationSummary run_verification(const VerificationOptions& options);

void print_verification_table(std::ostream& out, const VerificationSummary& summary);

}  // namespace fpi
