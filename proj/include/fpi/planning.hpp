#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpi/feasibility.hpp"
#include "fpi/mdp.hpp"

namespace fpi {

inline constexpr double kDefaultValueTolerance = 1e-10;

/// Stopping rule for value iteration: stop once the a-posteriori bound
/// gamma / (1 - gamma) * d_inf(V_{k+1}, V_k) on the distance to the fixed
/// point is at most `tolerance`.
struct ValueConfig {
    double tolerance = kDefaultValueTolerance;
    std::size_t max_sweeps = 1000000;

    void validate() const;
};

struct ValueSolution {
    TabularField value;
    TabularPolicy policy;
    std::size_t sweeps = 0;
    /// Last recorded d_inf(V_{k+1}, V_k).
    double residual = 0.0;
    std::vector<double> residual_history;
};

enum class ImprovementMode { ExactConstrained, Barrier };

struct ImprovementConfig {
    ImprovementMode mode = ImprovementMode::ExactConstrained;
    double threshold = kDefaultFeasibilityThreshold;  ///< p
    double barrier_t0 = 1.0;
    double barrier_factor = 1.1;
    std::size_t barrier_period = 1;  ///< outer iterations between t increases
    /// An incumbent action is kept unless a candidate scores more than this
    /// above it. Must exceed the evaluation noise (about 2 * gamma * eps_V).
    double tie_tolerance = 1e-9;

    void validate() const;
};

/// t at outer iteration `iteration`: t0 * factor^(iteration / period).
double barrier_parameter(const ImprovementConfig& cfg, std::size_t iteration);

/// Hard solver fault: inputs that a converged pipeline cannot produce.
class SolverFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// V of a fixed policy from V = 0. Violating cells are absorbing with
/// reward 0, so V = 0 there.
ValueSolution evaluate_policy(const FiniteMdp& mdp, const TabularPolicy& policy, const ValueConfig& cfg = {});

/// Region-wise improvement with the exact constrained argmax inside
/// {F < p} and argmin of the successor CDF outside it. Throws SolverFault
/// when an in-region cell has no action with F(successor) < p.
TabularPolicy improve_region_wise(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                                  const TabularField& value, const ImprovementConfig& cfg);

/// Log-barrier improvement: inside {F < p} maximize
///   r + gamma V(x') + log(p - F(x')) / t
/// over actions with F(x') < p. Outside the region as improve_region_wise.
TabularPolicy improve_barrier(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                              const TabularField& value, const ImprovementConfig& cfg, double t);

/// Value iteration with actions restricted to successors inside `region`.
/// Cells outside the region carry -infinity and action 0. Throws
/// SolverFault when a region cell has no in-region successor.
ValueSolution solve_feasible_bellman(const FiniteMdp& mdp, const RegionMask& region, const ValueConfig& cfg = {});

/// max over region cells of |max_{a : x' in region} (r + gamma V(x')) - V(x)|.
double feasible_bellman_residual(const FiniteMdp& mdp, const RegionMask& region, const TabularField& value);

struct FpiConfig {
    ImprovementConfig improvement;
    FixedPointConfig cdf;
    ValueConfig value;
    /// 0 selects S * A + 1.
    std::size_t max_iterations = 0;
};

/// Instrumentation for one outer iteration k -> k + 1.
struct FpiIterationRecord {
    std::size_t iteration = 0;
    std::size_t feasible_cells = 0;     ///< |X^{pi_k}|
    std::size_t band_cells = 0;         ///< cells with |F_k - p| <= eps_fp / (1 - gamma)
    std::size_t policy_changes = 0;
    double barrier_t = 0.0;
    double delta_f_sup = 0.0;           ///< max |F_{k+1} - F_k|
    double max_delta_f = 0.0;           ///< max (F_{k+1} - F_k)
    double min_delta_v_region = 0.0;    ///< min over X^{pi_k} of (V_{k+1} - V_k)
    std::size_t region_lost_cells = 0;  ///< X^{pi_k} \ X^{pi_{k+1}}
    std::size_t barrier_infeasible_choices = 0;
    double value_min = 0.0;             ///< statistics of V_k over X^{pi_k}
    double value_max = 0.0;
    double value_mean = 0.0;
    std::size_t cdf_sweeps = 0;
    std::size_t value_sweeps = 0;
    bool converged = false;
};

struct FpiReport {
    std::vector<FpiIterationRecord> records;
    TabularField cdf;
    TabularField value;
    TabularPolicy policy;
    RegionMask region;
    bool converged = false;
    std::size_t iterations = 0;  ///< improvement steps, including the one that changed nothing
};

/// Artifacts of iteration k, handed to an observer as they are produced.
struct FpiSnapshot {
    std::size_t iteration;
    const TabularField& cdf;
    const TabularField& value;
    const TabularPolicy& policy;
    const RegionMask& region;
};

using FpiObserver = std::function<void(const FpiSnapshot&)>;

class FpiIterationCapError : public std::runtime_error {
public:
    FpiIterationCapError(const std::string& what, FpiReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const FpiReport& report() const { return report_; }

private:
    FpiReport report_;
};

/// Feasible policy iteration: evaluate V and F of the current policy,
/// improve region-wise, repeat until the policy is unchanged for one full
/// iteration.
FpiReport run_fpi(const FiniteMdp& mdp, const TabularPolicy& initial, const FpiConfig& cfg = {},
                  const FpiObserver& observer = {});

}  // namespace fpi
