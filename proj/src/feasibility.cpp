#include "fpi/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace fpi {

namespace {

void require_cdf(const FiniteMdp& mdp, const TabularField& cdf) {
    if (cdf.kind != FieldKind::Cdf) throw std::invalid_argument("expected a CDF-tagged field");
    if (cdf.size() != mdp.cell_count()) throw std::invalid_argument("field size does not match MDP");
}

// One Jacobi sweep of the policy operator; returns d_inf(out, in).
double cdf_sweep(const FiniteMdp& mdp, const TabularPolicy& policy, const std::vector<double>& in,
                 std::vector<double>& out) {
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const double gamma = mdp.gamma();
    double residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
    for (std::int64_t s = 0; s < S; ++s) {
        const double v = mdp.violates(s) ? 1.0 : gamma * in[mdp.successor(s, policy[s])];
        out[s] = v;
        residual = std::max(residual, std::abs(v - in[s]));
    }
    return residual;
}

// One Jacobi sweep of the risky operator; returns d_inf(out, in).
double risky_sweep(const FiniteMdp& mdp, const std::vector<double>& in, std::vector<double>& out,
                   std::vector<ActionIndex>& argmin) {
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const auto A = static_cast<ActionIndex>(mdp.action_count());
    const double gamma = mdp.gamma();
    double residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
    for (std::int64_t s = 0; s < S; ++s) {
        ActionIndex best = 0;
        double best_f = in[mdp.successor(s, 0)];
        for (ActionIndex a = 1; a < A; ++a) {
            const double f = in[mdp.successor(s, a)];
            if (f < best_f) {
                best_f = f;
                best = a;
            }
        }
        argmin[s] = best;
        const double v = mdp.violates(s) ? 1.0 : gamma * best_f;
        out[s] = v;
        residual = std::max(residual, std::abs(v - in[s]));
    }
    return residual;
}

template <typename Sweep>
CdfSolution iterate_to_fixed_point(TabularField start, const FixedPointConfig& cfg,
                                   const char* label, Sweep&& sweep) {
    cfg.validate();
    CdfSolution sol;
    std::vector<double> current = std::move(start.values);
    std::vector<double> next(current.size());
    for (std::size_t k = 0; k < cfg.max_sweeps; ++k) {
        const double r = sweep(current, next, sol.policy);
        current.swap(next);
        sol.residual_history.push_back(r);
        if (r <= cfg.tolerance) {
            sol.cdf = TabularField{FieldKind::Cdf, std::move(current)};
            sol.sweeps = k + 1;
            sol.residual = r;
            return sol;
        }
    }
    std::string what = std::string(label) + ": no convergence within " + std::to_string(cfg.max_sweeps) +
                       " sweeps (last residual " + std::to_string(sol.residual_history.back()) + ")";
    throw NonConvergenceError(what, std::move(sol.residual_history));
}

}  // namespace

void FixedPointConfig::validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("fixed-point tolerance must be positive");
    if (max_sweeps < 1) throw std::invalid_argument("fixed-point sweep budget must be at least 1");
}

TabularField apply_cdf_operator(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf) {
    require_cdf(mdp, cdf);
    mdp.check_policy(policy);
    TabularField out = TabularField::filled(FieldKind::Cdf, mdp.cell_count(), 0.0);
    cdf_sweep(mdp, policy, cdf.values, out.values);
    return out;
}

CdfSolution identify_feasible_region(const FiniteMdp& mdp, const TabularPolicy& policy,
                                     const FixedPointConfig& cfg) {
    return identify_feasible_region(mdp, policy, TabularField::filled(FieldKind::Cdf, mdp.cell_count(), 0.0),
                                    cfg);
}

CdfSolution identify_feasible_region(const FiniteMdp& mdp, const TabularPolicy& policy,
                                     const TabularField& initial, const FixedPointConfig& cfg) {
    require_cdf(mdp, initial);
    if (!initial.range_ok()) throw std::invalid_argument("initial CDF outside [0, 1]");
    mdp.check_policy(policy);
    CdfSolution sol = iterate_to_fixed_point(
        initial, cfg, "feasible region identification",
        [&](const std::vector<double>& in, std::vector<double>& out, TabularPolicy&) {
            return cdf_sweep(mdp, policy, in, out);
        });
    sol.policy = policy;
    return sol;
}

std::pair<TabularField, TabularPolicy> apply_risky_operator(const FiniteMdp& mdp, const TabularField& cdf) {
    require_cdf(mdp, cdf);
    TabularField out = TabularField::filled(FieldKind::Cdf, mdp.cell_count(), 0.0);
    TabularPolicy argmin = TabularPolicy::constant(mdp.cell_count(), 0);
    risky_sweep(mdp, cdf.values, out.values, argmin.actions);
    return {std::move(out), std::move(argmin)};
}

CdfSolution solve_risky_bellman(const FiniteMdp& mdp, const FixedPointConfig& cfg) {
    return iterate_to_fixed_point(TabularField::filled(FieldKind::Cdf, mdp.cell_count(), 0.0), cfg,
                                  "risky Bellman solve",
                                  [&](const std::vector<double>& in, std::vector<double>& out, TabularPolicy& pi) {
                                      pi.actions.resize(mdp.cell_count());
                                      return risky_sweep(mdp, in, out, pi.actions);
                                  });
}

RegionMask extract_region(const TabularField& cdf, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("feasibility threshold must lie strictly inside (0, 1)");
    }
    RegionMask mask = RegionMask::empty(cdf.size());
    for (std::size_t s = 0; s < cdf.size(); ++s) {
        mask.members[s] = cdf[s] < threshold ? 1 : 0;
    }
    return mask;
}

std::size_t horizon_cap(double gamma, double tolerance) {
    return static_cast<std::size_t>(std::ceil(std::log(tolerance) / std::log(gamma)));
}

double cdf_self_consistency_residual(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf) {
    const TabularField next = apply_cdf_operator(mdp, policy, cdf);
    return sup_distance(next, cdf);
}

double risky_bellman_residual(const FiniteMdp& mdp, const TabularField& cdf) {
    return sup_distance(apply_risky_operator(mdp, cdf).first, cdf);
}

double sup_distance(const TabularField& a, const TabularField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("fields differ in size");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace fpi
