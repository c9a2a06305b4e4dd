#include "fpi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fpi {

bool EnvironmentSpec::violates(std::span<const double> state) const {
    const Vec h = constraint(state);
    return std::any_of(h.begin(), h.end(), [](double v) { return v > 0.0; });
}

GridSpec make_grid(const EnvironmentSpec& env,
                   std::span<const std::size_t> cells_per_dim,
                   std::span<const std::size_t> actions_per_dim) {
    auto broadcast = [](std::span<const std::size_t> in, std::size_t dims, const char* what) {
        if (in.size() == 1) return std::vector<std::size_t>(dims, in[0]);
        if (in.size() != dims) {
            throw std::invalid_argument(std::string(what) + ": expected 1 or " + std::to_string(dims) +
                                        " values, got " + std::to_string(in.size()));
        }
        return std::vector<std::size_t>(in.begin(), in.end());
    };

    const auto cells = broadcast(cells_per_dim, env.state_dim, "grid resolution");
    std::vector<Axis> axes;
    for (std::size_t d = 0; d < env.state_dim; ++d) {
        axes.push_back(Axis{env.state_domain.lower[d], env.state_domain.upper[d], cells[d]});
    }
    if (!env.discrete_actions.empty()) {
        return GridSpec(std::move(axes), env.discrete_actions);
    }
    const auto counts = broadcast(actions_per_dim, env.action_dim, "action count");
    return GridSpec(std::move(axes),
                    make_action_grid(env.action_domain.lower, env.action_domain.upper, counts));
}

bool TabularField::range_ok() const {
    if (kind != FieldKind::Cdf) return true;
    return std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

std::size_t RegionMask::count() const {
    return static_cast<std::size_t>(std::count_if(members.begin(), members.end(),
                                                  [](std::uint8_t m) { return m != 0; }));
}

bool RegionMask::subset_of(const RegionMask& other) const {
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i] && !other.members[i]) return false;
    }
    return true;
}

std::size_t RegionMask::mismatches(const RegionMask& other) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        n += (members[i] != 0) != (other.members[i] != 0);
    }
    return n;
}

FiniteMdp::FiniteMdp(std::size_t cells, std::size_t actions,
                     std::vector<CellIndex> successors,
                     std::vector<double> rewards,
                     std::vector<std::uint8_t> violating,
                     double gamma,
                     std::vector<CellIndex> initial_cells,
                     std::optional<GridSpec> grid)
    : cells_(cells),
      actions_(actions),
      successors_(std::move(successors)),
      rewards_(std::move(rewards)),
      violating_(std::move(violating)),
      gamma_(gamma),
      initial_cells_(std::move(initial_cells)),
      grid_(std::move(grid)) {
    if (cells_ == 0 || actions_ == 0) {
        throw std::invalid_argument("MDP needs at least one cell and one action");
    }
    if (successors_.size() != cells_ * actions_ || rewards_.size() != cells_ * actions_) {
        throw std::invalid_argument("successor/reward tables must have cells * actions entries");
    }
    if (violating_.size() != cells_) {
        throw std::invalid_argument("violation flags must have one entry per cell");
    }
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
        throw std::invalid_argument("discount factor must lie strictly inside (0, 1)");
    }
    const auto in_range = [this](CellIndex s) { return s >= 0 && static_cast<std::size_t>(s) < cells_; };
    if (!std::all_of(successors_.begin(), successors_.end(), in_range)) {
        throw std::invalid_argument("successor index out of range");
    }
    if (!std::all_of(initial_cells_.begin(), initial_cells_.end(), in_range)) {
        throw std::invalid_argument("initial cell index out of range");
    }
    if (!std::all_of(rewards_.begin(), rewards_.end(), [](double r) { return std::isfinite(r); })) {
        throw std::invalid_argument("rewards must be finite");
    }
    for (auto& v : violating_) v = v ? 1 : 0;
    if (grid_ && grid_->cell_count() != cells_) {
        throw std::invalid_argument("grid cell count does not match MDP");
    }
}

void FiniteMdp::check_policy(const TabularPolicy& policy) const {
    if (policy.size() != cells_) {
        throw std::invalid_argument("policy length " + std::to_string(policy.size()) +
                                    " does not match cell count " + std::to_string(cells_));
    }
    for (ActionIndex a : policy.actions) {
        if (a < 0 || static_cast<std::size_t>(a) >= actions_) {
            throw std::invalid_argument("policy action index out of range");
        }
    }
}

FiniteMdp discretize(const EnvironmentSpec& env, const GridSpec& grid, double gamma) {
    if (grid.dimensions() != env.state_dim) {
        throw std::invalid_argument("grid dimension does not match environment state dimension");
    }
    if (grid.action_dimensions() != env.action_dim) {
        throw std::invalid_argument("action dimension does not match environment");
    }
    const std::size_t S = grid.cell_count();
    const std::size_t A = grid.action_count();
    std::vector<CellIndex> successors(S * A);
    std::vector<double> rewards(S * A);
    std::vector<std::uint8_t> violating(S);
    std::vector<CellIndex> initial;

    auto fail = [&](std::size_t cell, const char* what) {
        throw std::domain_error(env.name + ": non-finite " + what + " at cell " + std::to_string(cell));
    };

    for (std::size_t s = 0; s < S; ++s) {
        const Vec x = grid.center(s);
        const Vec h = env.constraint(x);
        bool bad = false;
        for (double v : h) {
            if (!std::isfinite(v)) fail(s, "constraint");
            bad = bad || v > 0.0;
        }
        violating[s] = bad ? 1 : 0;
        if (!bad) initial.push_back(static_cast<CellIndex>(s));

        for (std::size_t a = 0; a < A; ++a) {
            const Vec& u = grid.action(a);
            const Vec next = env.step(x, u);
            if (next.size() != grid.dimensions()) {
                throw std::invalid_argument(env.name + ": stepper returned wrong state dimension");
            }
            for (double v : next) {
                if (!std::isfinite(v)) fail(s, "successor state");
            }
            const double r = env.reward(x, u);
            if (!std::isfinite(r)) fail(s, "reward");
            successors[s * A + a] = static_cast<CellIndex>(grid.nearest_cell(next));
            rewards[s * A + a] = r;
        }
    }
    return FiniteMdp(S, A, std::move(successors), std::move(rewards), std::move(violating), gamma,
                     std::move(initial), grid);
}

RegionMask constraint_indicator(const FiniteMdp& mdp) {
    RegionMask mask = RegionMask::empty(mdp.cell_count());
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        mask.members[s] = mdp.violates(s) ? 0 : 1;
    }
    return mask;
}

}  // namespace fpi
