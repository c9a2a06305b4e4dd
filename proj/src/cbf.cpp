#include <cmath>
#include <stdexcept>

#include "fpi/environments.hpp"

namespace fpi {

CbfSpec::CbfSpec(std::string name_, std::function<double(std::span<const double>)> barrier_, double decay_)
    : name(std::move(name_)), barrier(std::move(barrier_)), decay(decay_) {
    if (!(decay > 0.0 && decay <= 1.0)) {
        throw std::invalid_argument("barrier decay coefficient must lie in (0, 1]");
    }
}

bool CbfSpec::step_satisfies(std::span<const double> state, std::span<const double> next) const {
    const double b = barrier(state);
    return barrier(next) - b <= -decay * b;
}

CbfSpec acc_cbf(double decay) {
    return CbfSpec(
        "acc",
        [](std::span<const double> x) {
            const double ds = x[0];
            const double dv = x[1];
            return dv >= 0.0 ? -10.0 + ds + 4.5 * dv : -10.0 - ds - 3.2 * dv;
        },
        decay);
}

CbfSpec pendulum_cbf(double theta_max, double decay) {
    return CbfSpec(
        "pendulum",
        [theta_max](std::span<const double> x) {
            const double theta = x[0];
            const double omega = x[1];
            return omega >= 0.0 ? -theta_max + theta + 0.3 * omega : -theta_max - theta - 0.3 * omega;
        },
        decay);
}

RegionMask cbf_sublevel_mask(const CbfSpec& cbf, const GridSpec& grid) {
    RegionMask mask = RegionMask::empty(grid.cell_count());
    for (std::size_t s = 0; s < grid.cell_count(); ++s) {
        mask.members[s] = cbf.barrier(grid.center(s)) <= 0.0 ? 1 : 0;
    }
    return mask;
}

RegionMask cbf_safe_set(const CbfSpec& cbf, const FiniteMdp& mdp) {
    if (!mdp.grid()) throw std::invalid_argument("CBF masks need a grid-induced MDP");
    RegionMask mask = cbf_sublevel_mask(cbf, *mdp.grid());
    for (std::size_t s = 0; s < mask.size(); ++s) {
        if (mdp.violates(s)) mask.members[s] = 0;
    }
    return mask;
}

CbfAudit audit_cbf(const CbfSpec& cbf, const EnvironmentSpec& env, const FiniteMdp& mdp) {
    if (!mdp.grid()) throw std::invalid_argument("CBF audit needs a grid-induced MDP");
    const GridSpec& grid = *mdp.grid();
    CbfAudit audit;
    for (std::size_t s = 0; s < grid.cell_count(); ++s) {
        const Vec x = grid.center(s);
        const double b = cbf.barrier(x);
        if (b > 0.0) continue;
        if (mdp.violates(s)) {
            audit.outside_constraint.push_back(s);
            continue;
        }
        bool stays = false;
        bool decays = false;
        for (const Vec& u : grid.actions()) {
            const Vec next = env.step(x, u);
            stays = stays || cbf.barrier(next) <= 0.0;
            decays = decays || cbf.step_satisfies(x, next);
            if (stays && decays) break;
        }
        if (!stays) audit.not_forward_invariant.push_back(s);
        if (!decays) audit.decay_unsatisfiable.push_back(s);
    }
    return audit;
}

std::optional<CbfSpec> make_cbf(const EnvironmentSpec& env) {
    if (env.name == "acc") return acc_cbf();
    if (env.name == "pendulum") return pendulum_cbf(env.params.at("theta_max"));
    return std::nullopt;
}

}  // namespace fpi
