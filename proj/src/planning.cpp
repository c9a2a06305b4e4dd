#include "fpi/planning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fpi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_sizes(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                   const TabularField& value) {
    mdp.check_policy(policy);
    if (cdf.size() != mdp.cell_count() || value.size() != mdp.cell_count()) {
        throw std::invalid_argument("field size does not match MDP");
    }
}

// Running argmax with the tie rules shared by all improvement steps: the
// highest score wins, exact ties go to the lowest index, and the incumbent
// survives unless beaten by more than `tie_tolerance`.
struct ArgmaxWithIncumbent {
    ActionIndex incumbent;
    double tie_tolerance;
    ActionIndex best = -1;
    double best_score = kNegInf;
    double incumbent_score = kNegInf;
    bool incumbent_seen = false;

    void offer(ActionIndex a, double score) {
        if (best < 0 || score > best_score) {
            best = a;
            best_score = score;
        }
        if (a == incumbent) {
            incumbent_seen = true;
            incumbent_score = score;
        }
    }

    ActionIndex choice() const {
        if (incumbent_seen && incumbent_score >= best_score - tie_tolerance) return incumbent;
        return best;
    }
};

// Outside the region: minimize F(x'), break exact ties by one-step value.
ActionIndex improve_outside(const FiniteMdp& mdp, std::size_t s, ActionIndex incumbent, const TabularField& cdf,
                            const TabularField& value, double tie_tolerance) {
    const auto A = static_cast<ActionIndex>(mdp.action_count());
    const double gamma = mdp.gamma();
    double min_f = std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < A; ++a) min_f = std::min(min_f, cdf[mdp.successor(s, a)]);
    ArgmaxWithIncumbent pick{incumbent, tie_tolerance};
    for (ActionIndex a = 0; a < A; ++a) {
        const CellIndex next = mdp.successor(s, a);
        if (cdf[next] != min_f) continue;
        pick.offer(a, mdp.reward(s, a) + gamma * value[next]);
    }
    return pick.choice();
}

template <typename Score>
TabularPolicy improve_with(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                           const TabularField& value, const ImprovementConfig& cfg, Score&& score) {
    require_sizes(mdp, policy, cdf, value);
    cfg.validate();
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const auto A = static_cast<ActionIndex>(mdp.action_count());
    const double p = cfg.threshold;
    TabularPolicy next = policy;
    std::atomic<std::int64_t> stuck{-1};

#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < S; ++s) {
        if (!(cdf[s] < p)) {
            next[s] = improve_outside(mdp, s, policy[s], cdf, value, cfg.tie_tolerance);
            continue;
        }
        ArgmaxWithIncumbent pick{policy[s], cfg.tie_tolerance};
        for (ActionIndex a = 0; a < A; ++a) {
            const CellIndex succ = mdp.successor(s, a);
            const double f = cdf[succ];
            if (!(f < p)) continue;
            pick.offer(a, score(mdp.reward(s, a) + mdp.gamma() * value[succ], f));
        }
        if (pick.best < 0) {
            std::int64_t expected = -1;
            stuck.compare_exchange_strong(expected, s);
            continue;
        }
        next[s] = pick.choice();
    }

    if (const std::int64_t s = stuck.load(); s >= 0) {
        throw SolverFault("region-wise improvement: cell " + std::to_string(s) +
                          " lies in the feasible region but has no action with F(successor) < p");
    }
    return next;
}

}  // namespace

void ValueConfig::validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("value tolerance must be positive");
    if (max_sweeps < 1) throw std::invalid_argument("value sweep budget must be at least 1");
}

void ImprovementConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("feasibility threshold must lie strictly inside (0, 1)");
    }
    if (!(barrier_t0 > 0.0)) throw std::invalid_argument("barrier t0 must be positive");
    if (!(barrier_factor > 1.0)) throw std::invalid_argument("barrier t factor must exceed 1");
    if (barrier_period < 1) throw std::invalid_argument("barrier t period must be at least 1");
    if (!(tie_tolerance >= 0.0)) throw std::invalid_argument("tie tolerance must be non-negative");
}

double barrier_parameter(const ImprovementConfig& cfg, std::size_t iteration) {
    double t = cfg.barrier_t0;
    for (std::size_t k = 0; k < iteration / cfg.barrier_period; ++k) t *= cfg.barrier_factor;
    return t;
}

ValueSolution evaluate_policy(const FiniteMdp& mdp, const TabularPolicy& policy, const ValueConfig& cfg) {
    cfg.validate();
    mdp.check_policy(policy);
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const double gamma = mdp.gamma();
    const double bound_factor = gamma / (1.0 - gamma);

    std::vector<double> v(S, 0.0);
    std::vector<double> next(S, 0.0);
    ValueSolution sol;
    for (std::size_t k = 0; k < cfg.max_sweeps; ++k) {
        double delta = 0.0;
#pragma omp parallel for schedule(static) reduction(max : delta)
        for (std::int64_t s = 0; s < S; ++s) {
            double x = 0.0;
            if (!mdp.violates(s)) {
                const ActionIndex a = policy[s];
                x = mdp.reward(s, a) + gamma * v[mdp.successor(s, a)];
            }
            next[s] = x;
            delta = std::max(delta, std::abs(x - v[s]));
        }
        v.swap(next);
        sol.residual_history.push_back(delta);
        if (delta == 0.0 || bound_factor * delta <= cfg.tolerance) {
            sol.value = TabularField{FieldKind::Value, std::move(v)};
            sol.policy = policy;
            sol.sweeps = k + 1;
            sol.residual = delta;
            return sol;
        }
    }
    throw NonConvergenceError("policy evaluation: no convergence within " + std::to_string(cfg.max_sweeps) +
                                  " sweeps",
                              std::move(sol.residual_history));
}

TabularPolicy improve_region_wise(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                                  const TabularField& value, const ImprovementConfig& cfg) {
    return improve_with(mdp, policy, cdf, value, cfg, [](double q, double) { return q; });
}

TabularPolicy improve_barrier(const FiniteMdp& mdp, const TabularPolicy& policy, const TabularField& cdf,
                              const TabularField& value, const ImprovementConfig& cfg, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("barrier parameter t must be positive");
    const double p = cfg.threshold;
    const double inv_t = 1.0 / t;
    return improve_with(mdp, policy, cdf, value, cfg,
                        [p, inv_t](double q, double f) { return q + inv_t * std::log(p - f); });
}

ValueSolution solve_feasible_bellman(const FiniteMdp& mdp, const RegionMask& region, const ValueConfig& cfg) {
    cfg.validate();
    if (region.size() != mdp.cell_count()) throw std::invalid_argument("region size does not match MDP");
    const auto S = static_cast<std::int64_t>(mdp.cell_count());
    const auto A = static_cast<ActionIndex>(mdp.action_count());
    const double gamma = mdp.gamma();
    const double bound_factor = gamma / (1.0 - gamma);

    for (std::int64_t s = 0; s < S; ++s) {
        if (!region.contains(s)) continue;
        bool closed = false;
        for (ActionIndex a = 0; a < A && !closed; ++a) closed = region.contains(mdp.successor(s, a));
        if (!closed) {
            throw SolverFault("feasible Bellman solve: region cell " + std::to_string(s) +
                              " has no action keeping the successor in the region");
        }
    }

    std::vector<double> v(S, 0.0);
    std::vector<double> next(S, 0.0);
    std::vector<ActionIndex> greedy(S, 0);
    ValueSolution sol;
    for (std::size_t k = 0; k < cfg.max_sweeps; ++k) {
        double delta = 0.0;
#pragma omp parallel for schedule(static) reduction(max : delta)
        for (std::int64_t s = 0; s < S; ++s) {
            if (!region.contains(s)) continue;
            double best = kNegInf;
            ActionIndex best_a = 0;
            for (ActionIndex a = 0; a < A; ++a) {
                const CellIndex succ = mdp.successor(s, a);
                if (!region.contains(succ)) continue;
                const double q = mdp.reward(s, a) + gamma * v[succ];
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            next[s] = best;
            greedy[s] = best_a;
            delta = std::max(delta, std::abs(best - v[s]));
        }
        v.swap(next);
        sol.residual_history.push_back(delta);
        if (delta == 0.0 || bound_factor * delta <= cfg.tolerance) {
            for (std::int64_t s = 0; s < S; ++s) {
                if (!region.contains(s)) v[s] = kNegInf;
            }
            sol.value = TabularField{FieldKind::Value, std::move(v)};
            sol.policy = TabularPolicy{std::move(greedy)};
            sol.sweeps = k + 1;
            sol.residual = delta;
            return sol;
        }
    }
    throw NonConvergenceError("feasible Bellman solve: no convergence within " + std::to_string(cfg.max_sweeps) +
                                  " sweeps",
                              std::move(sol.residual_history));
}

double feasible_bellman_residual(const FiniteMdp& mdp, const RegionMask& region, const TabularField& value) {
    const auto A = static_cast<ActionIndex>(mdp.action_count());
    double worst = 0.0;
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        if (!region.contains(s)) continue;
        double best = kNegInf;
        for (ActionIndex a = 0; a < A; ++a) {
            const CellIndex succ = mdp.successor(s, a);
            if (!region.contains(succ)) continue;
            best = std::max(best, mdp.reward(s, a) + mdp.gamma() * value[succ]);
        }
        worst = std::max(worst, std::abs(best - value[s]));
    }
    return worst;
}

FpiReport run_fpi(const FiniteMdp& mdp, const TabularPolicy& initial, const FpiConfig& cfg,
                  const FpiObserver& observer) {
    cfg.improvement.validate();
    mdp.check_policy(initial);
    const std::size_t S = mdp.cell_count();
    const double p = cfg.improvement.threshold;
    const double band = cfg.cdf.tolerance / (1.0 - mdp.gamma());
    const std::size_t cap = cfg.max_iterations ? cfg.max_iterations : S * mdp.action_count() + 1;

    TabularPolicy policy = initial;
    ValueSolution vsol = evaluate_policy(mdp, policy, cfg.value);
    CdfSolution fsol = identify_feasible_region(mdp, policy, cfg.cdf);
    RegionMask region = extract_region(fsol.cdf, p);
    if (observer) observer(FpiSnapshot{0, fsol.cdf, vsol.value, policy, region});

    FpiReport report;
    for (std::size_t k = 0; k < cap; ++k) {
        FpiIterationRecord rec;
        rec.iteration = k;
        rec.feasible_cells = region.count();
        rec.cdf_sweeps = fsol.sweeps;
        rec.value_sweeps = vsol.sweeps;
        rec.value_min = std::numeric_limits<double>::infinity();
        rec.value_max = kNegInf;
        double sum = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            if (std::abs(fsol.cdf[s] - p) <= band) ++rec.band_cells;
            if (!region.contains(s)) continue;
            rec.value_min = std::min(rec.value_min, vsol.value[s]);
            rec.value_max = std::max(rec.value_max, vsol.value[s]);
            sum += vsol.value[s];
        }
        if (rec.feasible_cells > 0) {
            rec.value_mean = sum / static_cast<double>(rec.feasible_cells);
        } else {
            rec.value_min = rec.value_max = 0.0;
        }

        TabularPolicy next;
        if (cfg.improvement.mode == ImprovementMode::Barrier) {
            rec.barrier_t = barrier_parameter(cfg.improvement, k);
            next = improve_barrier(mdp, policy, fsol.cdf, vsol.value, cfg.improvement, rec.barrier_t);
        } else {
            next = improve_region_wise(mdp, policy, fsol.cdf, vsol.value, cfg.improvement);
        }
        for (std::size_t s = 0; s < S; ++s) {
            rec.policy_changes += next[s] != policy[s];
            if (region.contains(s) && !(fsol.cdf[mdp.successor(s, next[s])] < p)) ++rec.barrier_infeasible_choices;
        }

        if (rec.policy_changes == 0) {
            rec.converged = true;
            report.records.push_back(rec);
            report.converged = true;
            report.iterations = k + 1;
            report.cdf = std::move(fsol.cdf);
            report.value = std::move(vsol.value);
            report.policy = std::move(policy);
            report.region = std::move(region);
            return report;
        }

        ValueSolution vnext = evaluate_policy(mdp, next, cfg.value);
        CdfSolution fnext = identify_feasible_region(mdp, next, cfg.cdf);
        RegionMask rnext = extract_region(fnext.cdf, p);

        rec.min_delta_v_region = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < S; ++s) {
            const double df = fnext.cdf[s] - fsol.cdf[s];
            rec.delta_f_sup = std::max(rec.delta_f_sup, std::abs(df));
            rec.max_delta_f = s == 0 ? df : std::max(rec.max_delta_f, df);
            if (region.contains(s)) {
                rec.min_delta_v_region = std::min(rec.min_delta_v_region, vnext.value[s] - vsol.value[s]);
                rec.region_lost_cells += !rnext.contains(s);
            }
        }
        if (rec.feasible_cells == 0) rec.min_delta_v_region = 0.0;
        report.records.push_back(rec);

        policy = std::move(next);
        vsol = std::move(vnext);
        fsol = std::move(fnext);
        region = std::move(rnext);
        if (observer) observer(FpiSnapshot{k + 1, fsol.cdf, vsol.value, policy, region});
    }

    report.iterations = cap;
    report.cdf = std::move(fsol.cdf);
    report.value = std::move(vsol.value);
    report.policy = std::move(policy);
    report.region = std::move(region);
    throw FpiIterationCapError("feasible policy iteration: no policy fixpoint within " + std::to_string(cap) +
                                   " iterations",
                               std::move(report));
}

}  // namespace fpi
