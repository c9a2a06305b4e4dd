#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpi/mdp.hpp"

namespace fpi {

inline constexpr double kDefaultFixedPointTolerance = 1e-12;
inline constexpr double kDefaultFeasibilityThreshold = 0.1;

struct FixedPointConfig {
    double tolerance = kDefaultFixedPointTolerance;  ///< sup-norm stop on successive iterates
    std::size_t max_sweeps = 100000;

    void validate() const;
};

/// Converged constraint decay function together with its iteration trace.
struct CdfSolution {
    TabularField cdf;
    /// The evaluated policy, or the argmin policy of the risky operator.
    TabularPolicy policy;
    std::size_t sweeps = 0;
    double residual = 0.0;
    /// d_inf(F_{k+1}, F_k) for every sweep, in order.
    std::vector<double> residual_history;
};

/// Raised when a fixed-point iteration exhausts its sweep budget.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// One synchronous sweep of F <- c + (1 - c) * gamma * F(successor under policy).
TabularField apply_cdf_operator(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf);

/// Iterates the policy's constraint decay operator from `initial` (F = 0
/// when omitted) until successive iterates are within the tolerance.
CdfSolution identify_feasible_region(const FiniteMdp& mdp, const TabularPolicy& policy,
                                     const FixedPointConfig& cfg = {});
CdfSolution identify_feasible_region(const FiniteMdp& mdp, const TabularPolicy& policy,
                                     const TabularField& initial, const FixedPointConfig& cfg);

/// One synchronous sweep of F <- c + (1 - c) * gamma * min_a F(successor)
/// and the argmin policy (lowest action index on ties).
std::pair<TabularField, TabularPolicy> apply_risky_operator(const FiniteMdp& mdp, const TabularField& cdf);

/// Optimal constraint decay function: fixed point of the risky operator
/// from F = 0.
CdfSolution solve_risky_bellman(const FiniteMdp& mdp, const FixedPointConfig& cfg = {});

/// {cell : F(cell) < threshold}. Requires 0 < threshold < 1.
RegionMask extract_region(const TabularField& cdf, double threshold = kDefaultFeasibilityThreshold);

/// Steps beyond which gamma^N drops below `tolerance`: ceil(log_gamma tolerance).
std::size_t horizon_cap(double gamma, double tolerance);

/// max_cell |F - D^pi F|.
double cdf_self_consistency_residual(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf);
/// max_cell |F - D* F|.
double risky_bellman_residual(const FiniteMdp& mdp, const TabularField& cdf);

/// Sup-norm distance between two fields of equal size.
double sup_distance(const TabularField& a, const TabularField& b);

}  // namespace fpi
