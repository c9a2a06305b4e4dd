#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpi/environment.hpp"
#include "fpi/mdp.hpp"

namespace fpi {

// ---------------------------------------------------------------------------
// Adaptive cruise control
//
// State (ds, dv): gap error to the desired distance and relative velocity.
// Action a: acceleration of the following vehicle. Continuous dynamics
//   ds' = dv,  dv' = -a
// integrated with one forward-Euler step of length dt.
// ---------------------------------------------------------------------------
struct AccParams {
    double dt = 0.1;
    double ds_max = 10.0;   ///< constraint |ds| <= ds_max
    double a_max = 2.0;     ///< actions sampled from [-a_max, a_max]
    double ds_range = 15.0; ///< grid covers ds in [-ds_range, ds_range]
    double dv_range = 6.0;  ///< grid covers dv in [-dv_range, dv_range]

    static AccParams from_bag(const ParameterBag& overrides);
};

EnvironmentSpec acc_env(const AccParams& params = {});

// ---------------------------------------------------------------------------
// Inverted pendulum
//
// State (theta, omega), theta = 0 upright, positive torque accelerates theta
// positively:
//   theta'' = (g / l) sin(theta) + tau / (m l^2)
// integrated with one forward-Euler step of length dt.
// ---------------------------------------------------------------------------
struct PendulumParams {
    double dt = 0.1;
    double mass = 1.0;
    double length = 1.0;
    double gravity = 9.8;
    double tau_max = 10.0;
    double theta_max = std::numbers::pi / 4.0;
    double theta_range = 1.0;
    double omega_range = 6.0;

    static PendulumParams from_bag(const ParameterBag& overrides);
};

EnvironmentSpec pendulum_env(const PendulumParams& params = {});

// ---------------------------------------------------------------------------
// Gridworld
//
// Integer cell coordinates (x, y) with 0 <= x < width, 0 <= y < height.
// Actions: stay (optional), then right, left, up, down, then the four
// diagonals when `diagonal_moves` is set. A move that would leave the grid
// leaves the agent where it is. A wind cell adds its push to the post-move
// position of an agent that started the step on it; the pushed position is
// clamped to the grid.
//
// Reward: -distance_weight * |x - goal|_1 - move_cost * [action != stay].
// Constraint: +1 on hazard cells, -1 elsewhere.
// ---------------------------------------------------------------------------
struct GridCoord {
    int x = 0;
    int y = 0;
    bool operator==(const GridCoord&) const = default;
};

struct Wind {
    GridCoord cell;
    int dx = 0;
    int dy = 0;
};

struct GridworldParams {
    int width = 5;
    int height = 5;
    std::vector<GridCoord> hazards;
    GridCoord goal;
    std::vector<Wind> winds;
    bool include_stay = true;
    bool diagonal_moves = false;
    double distance_weight = 0.1;
    double move_cost = 0.01;
};

EnvironmentSpec gridworld_env(const GridworldParams& params);

/// Grid with one cell per integer coordinate.
GridSpec gridworld_grid(const EnvironmentSpec& env);

/// 5x5: a hazard strip along the bottom edge under a wind row pushing
/// down onto it, goal in the bottom-right corner.
GridworldParams gridworld_tiny();
/// 11x11: bottom hazard strip with a two-row downward wind corridor above
/// it, a vertical hazard wall and an isolated hazard cell.
GridworldParams gridworld_standard();

// ---------------------------------------------------------------------------
// Handcrafted control barrier functions
//
// The barrier constraint for a step x -> x' is B(x') - B(x) <= -decay * B(x).
// ---------------------------------------------------------------------------
inline constexpr double kDefaultCbfDecay = 0.1;

struct CbfSpec {
    std::string name;
    std::function<double(std::span<const double>)> barrier;
    double decay = kDefaultCbfDecay;

    CbfSpec(std::string name, std::function<double(std::span<const double>)> barrier,
            double decay = kDefaultCbfDecay);

    /// Barrier constraint B(next) - B(state) <= -decay * B(state).
    bool step_satisfies(std::span<const double> state, std::span<const double> next) const;
};

/// B = -10 + ds + 4.5 dv for dv >= 0, and -10 - ds - 3.2 dv otherwise.
CbfSpec acc_cbf(double decay = kDefaultCbfDecay);

/// B = -theta_max + theta + 0.3 omega for omega >= 0, and
/// -theta_max - theta - 0.3 omega otherwise.
CbfSpec pendulum_cbf(double theta_max, double decay = kDefaultCbfDecay);

/// Zero-sublevel set {B <= 0} evaluated at cell centers.
RegionMask cbf_sublevel_mask(const CbfSpec& cbf, const GridSpec& grid);

/// {B <= 0} restricted to the constrained set of `mdp`. The printed
/// barriers bound only one side of the state box per branch, so the raw
/// sublevel set also covers violating cells far on the other side.
RegionMask cbf_safe_set(const CbfSpec& cbf, const FiniteMdp& mdp);

struct CbfAudit {
    /// Cells of {B <= 0} that violate the state constraint.
    std::vector<std::size_t> outside_constraint;
    /// Safe-set cells with no action keeping the continuous successor in
    /// {B <= 0}.
    std::vector<std::size_t> not_forward_invariant;
    /// Safe-set cells where no action satisfies the decay constraint.
    std::vector<std::size_t> decay_unsatisfiable;

    bool flagged() const { return !not_forward_invariant.empty(); }
};

/// Exhaustive one-step search over the grid's action list from every cell
/// center of the CBF safe set.
CbfAudit audit_cbf(const CbfSpec& cbf, const EnvironmentSpec& env, const FiniteMdp& mdp);

// ---------------------------------------------------------------------------
// Factory used by configuration-driven callers.
// ---------------------------------------------------------------------------

/// Builds "acc", "pendulum" or "gridworld" with numeric overrides of the
/// parameter-bag keys. The gridworld layout comes from `gridworld_preset`
/// ("tiny" or "standard"); only its reward weights are overridable.
/// Unknown names and keys throw std::invalid_argument.
EnvironmentSpec make_environment(const std::string& name, const ParameterBag& overrides,
                                 const std::string& gridworld_preset = "standard");

/// Barrier for the named environment, if one is defined.
std::optional<CbfSpec> make_cbf(const EnvironmentSpec& env);

}  // namespace fpi
