#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fpi/grid.hpp"

namespace fpi {

using ParameterBag = std::map<std::string, double>;

/// Axis-aligned box, one interval per dimension.
struct Box {
    Vec lower;
    Vec upper;
};

/// A deterministic control task: discrete-time stepper, reward and
/// (possibly vector-valued) constraint. All three callables must be pure.
struct EnvironmentSpec {
    using Stepper = std::function<Vec(std::span<const double> state, std::span<const double> action)>;
    using Reward = std::function<double(std::span<const double> state, std::span<const double> action)>;
    using Constraint = std::function<Vec(std::span<const double> state)>;

    std::string name;
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    Stepper step;
    Reward reward;
    Constraint constraint;
    ParameterBag params;

    /// Working domain. The evaluation grid is laid over `state_domain`.
    Box state_domain;
    Box action_domain;
    /// Fixed action set for inherently discrete tasks; empty means the
    /// action set is sampled from `action_domain`.
    std::vector<Vec> discrete_actions;

    /// Violation means any constraint component is strictly positive.
    bool violates(std::span<const double> state) const;
};

/// Uniform grid over the environment's working domain. `cells_per_dim` and
/// `actions_per_dim` may hold a single value that is broadcast to every
/// dimension. For environments with discrete actions `actions_per_dim` is
/// ignored.
GridSpec make_grid(const EnvironmentSpec& env,
                   std::span<const std::size_t> cells_per_dim,
                   std::span<const std::size_t> actions_per_dim);

}  // namespace fpi
