#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fpi/environment.hpp"
#include "fpi/grid.hpp"

namespace fpi {

using CellIndex = std::int32_t;
using ActionIndex = std::int32_t;

inline constexpr double kDefaultDiscount = 0.99;

enum class FieldKind {
    Cdf,    ///< values confined to [0, 1]
    Value,  ///< unbounded
};

/// A scalar per grid cell. Used for constraint decay functions and
/// state-value functions.
struct TabularField {
    FieldKind kind = FieldKind::Value;
    std::vector<double> values;

    static TabularField filled(FieldKind kind, std::size_t cells, double value) {
        return TabularField{kind, std::vector<double>(cells, value)};
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    /// True unless this is a CDF field with a value outside [0, 1].
    bool range_ok() const;

    bool operator==(const TabularField&) const = default;
};

struct TabularPolicy {
    std::vector<ActionIndex> actions;

    static TabularPolicy constant(std::size_t cells, ActionIndex a) {
        return TabularPolicy{std::vector<ActionIndex>(cells, a)};
    }

    std::size_t size() const { return actions.size(); }
    ActionIndex operator[](std::size_t i) const { return actions[i]; }
    ActionIndex& operator[](std::size_t i) { return actions[i]; }

    bool operator==(const TabularPolicy&) const = default;
};

struct RegionMask {
    std::vector<std::uint8_t> members;

    static RegionMask empty(std::size_t cells) { return RegionMask{std::vector<std::uint8_t>(cells, 0)}; }

    std::size_t size() const { return members.size(); }
    bool contains(std::size_t i) const { return members[i] != 0; }
    std::size_t count() const;
    /// Every member of *this is a member of `other`.
    bool subset_of(const RegionMask& other) const;
    std::size_t mismatches(const RegionMask& other) const;

    bool operator==(const RegionMask&) const = default;
};

/// Finite deterministic MDP with tabular successors and rewards.
///
/// Violating cells (c = 1) are part of the table like any other cell; how
/// they are treated is up to each solver.
class FiniteMdp {
public:
    FiniteMdp(std::size_t cells, std::size_t actions,
              std::vector<CellIndex> successors,
              std::vector<double> rewards,
              std::vector<std::uint8_t> violating,
              double gamma,
              std::vector<CellIndex> initial_cells = {},
              std::optional<GridSpec> grid = std::nullopt);

    std::size_t cell_count() const { return cells_; }
    std::size_t action_count() const { return actions_; }
    double gamma() const { return gamma_; }

    CellIndex successor(std::size_t cell, std::size_t action) const {
        return successors_[cell * actions_ + action];
    }
    double reward(std::size_t cell, std::size_t action) const {
        return rewards_[cell * actions_ + action];
    }
    bool violates(std::size_t cell) const { return violating_[cell] != 0; }

    std::span<const CellIndex> successors() const { return successors_; }
    std::span<const double> rewards() const { return rewards_; }
    std::span<const std::uint8_t> violation_flags() const { return violating_; }
    std::span<const CellIndex> initial_cells() const { return initial_cells_; }

    /// Present when the MDP was induced from a grid.
    const std::optional<GridSpec>& grid() const { return grid_; }

    /// Rejects policies of the wrong length or with out-of-range actions.
    void check_policy(const TabularPolicy& policy) const;

    bool operator==(const FiniteMdp&) const = default;

private:
    std::size_t cells_;
    std::size_t actions_;
    std::vector<CellIndex> successors_;
    std::vector<double> rewards_;
    std::vector<std::uint8_t> violating_;
    double gamma_;
    std::vector<CellIndex> initial_cells_;
    std::optional<GridSpec> grid_;
};

/// Induces the finite MDP of `env` on `grid` by nearest-center snapping of
/// each cell center's successor. The initial-cell set defaults to every
/// non-violating cell.
///
/// Throws std::domain_error on a non-finite successor, reward or
/// constraint value.
FiniteMdp discretize(const EnvironmentSpec& env, const GridSpec& grid, double gamma = kDefaultDiscount);

/// Members are the cells with c = 0, i.e. the constrained set h <= 0.
RegionMask constraint_indicator(const FiniteMdp& mdp);

}  // namespace fpi
