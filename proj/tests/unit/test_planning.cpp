#include <gtest/gtest.h>

#include <cmath>

#include "../support.hpp"
#include "fpi/environments.hpp"
#include "fpi/oracle.hpp"
#include "fpi/planning.hpp"
#include "fpi/random_mdp.hpp"

namespace fpi {
namespace {

using testing::table_mdp;

TEST(EvaluatePolicy, GeometricSeries) {
    const FiniteMdp mdp = table_mdp(2, 1, {0, 1}, {1}, {-1.0, -5.0});
    const ValueSolution v = evaluate_policy(mdp, TabularPolicy::constant(2, 0));
    EXPECT_NEAR(v.value[0], -100.0, 1e-8);
    EXPECT_EQ(v.value[1], 0.0);
}

TEST(EvaluatePolicy, MatchesLinearSolve) {
    RandomMdpOptions opts;
    opts.min_cells = 5;
    opts.max_cells = 5;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const FiniteMdp mdp = random_mdp(seed, opts);
        std::mt19937_64 rng(seed * 7);
        const auto pi = random_policy(rng, 5, mdp.action_count());
        const ValueSolution v = evaluate_policy(mdp, pi);
        const auto exact = testing::linear_policy_value(mdp, pi.actions);
        for (std::size_t s = 0; s < 5; ++s) EXPECT_NEAR(v.value[s], exact[s], 2e-10) << "seed " << seed;
    }
}

TEST(ImproveRegionWise, SingletonFeasibleSetKeepsAction) {
    // Cell 0 is in the region; only action 2 leads to a feasible cell.
    const FiniteMdp mdp = table_mdp(3, 3, {1, 1, 2, 1, 1, 1, 2, 2, 2}, {1}, {5, 5, -3, 0, 0, 0, 0, 0, 0});
    const TabularField f{FieldKind::Cdf, {0.0, 1.0, 0.0}};
    const TabularField v{FieldKind::Value, {0.0, 0.0, 0.0}};
    const TabularPolicy next = improve_region_wise(mdp, TabularPolicy{{2, 0, 0}}, f, v, ImprovementConfig{});
    EXPECT_EQ(next[0], 2);
}

TEST(ImproveRegionWise, OutsideRegionMinimizesCdfThenValue) {
    // Cell 0 (F = 0.95, outside) reaches cells with F = 0.9, 0.3, 0.3.
    const FiniteMdp mdp = table_mdp(4, 3, {1, 2, 3, 1, 1, 1, 2, 2, 2, 3, 3, 3}, {},
                                    {0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    const TabularField f{FieldKind::Cdf, {0.95, 0.9, 0.3, 0.3}};
    const TabularField v{FieldKind::Value, {0.0, 10.0, -2.0, -2.0}};
    const TabularPolicy next = improve_region_wise(mdp, TabularPolicy{{0, 0, 0, 0}}, f, v, ImprovementConfig{});
    EXPECT_EQ(next[0], 2);
}

TEST(ImproveRegionWise, IncumbentSurvivesNearTies) {
    const FiniteMdp mdp = table_mdp(2, 2, {1, 1, 1, 1}, {}, {0.0, 1e-12, 0.0, 0.0});
    const TabularField f{FieldKind::Cdf, {0.0, 0.0}};
    const TabularField v{FieldKind::Value, {0.0, 0.0}};
    EXPECT_EQ(improve_region_wise(mdp, TabularPolicy{{0, 0}}, f, v, ImprovementConfig{})[0], 0);
    ImprovementConfig strict;
    strict.tie_tolerance = 0.0;
    EXPECT_EQ(improve_region_wise(mdp, TabularPolicy{{0, 0}}, f, v, strict)[0], 1);
}

TEST(ImproveRegionWise, EmptyFeasibleSetIsAFault) {
    const FiniteMdp mdp = table_mdp(2, 1, {1, 1}, {1});
    const TabularField f{FieldKind::Cdf, {0.0, 1.0}};
    const TabularField v{FieldKind::Value, {0.0, 0.0}};
    EXPECT_THROW(improve_region_wise(mdp, TabularPolicy{{0, 0}}, f, v, ImprovementConfig{}), SolverFault);
}

TEST(Barrier, ScheduleArithmetic) {
    ImprovementConfig cfg;
    EXPECT_DOUBLE_EQ(barrier_parameter(cfg, 0), 1.0);
    EXPECT_NEAR(barrier_parameter(cfg, 3), 1.331, 1e-12);
    cfg.barrier_period = 2;
    EXPECT_NEAR(barrier_parameter(cfg, 5), 1.21, 1e-12);
}

TEST(Barrier, FeasibleAtFiniteTAndExactInTheLimit) {
    const EnvironmentSpec env = acc_env();
    const std::vector<std::size_t> cells{41, 41}, acts{9};
    const FiniteMdp mdp = discretize(env, make_grid(env, cells, acts));
    const FpiReport report = run_fpi(mdp, TabularPolicy::constant(mdp.cell_count(), 0));
    ImprovementConfig cfg;
    const TabularPolicy exact = improve_region_wise(mdp, report.policy, report.cdf, report.value, cfg);
    for (double t : {1.0, 1.331, 10.0, 1e6}) {
        const TabularPolicy b = improve_barrier(mdp, report.policy, report.cdf, report.value, cfg, t);
        std::size_t agree = 0, region = 0;
        for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
            if (!report.region.contains(s)) continue;
            ++region;
            EXPECT_LT(report.cdf[mdp.successor(s, b[s])], 0.1);
            agree += b[s] == exact[s];
        }
        if (t >= 1e6) {
            EXPECT_GE(static_cast<double>(agree), 0.99 * static_cast<double>(region));
        }
    }
}

TEST(FeasibleBellman, SelfLoopZeroReward) {
    const FiniteMdp mdp = table_mdp(1, 1, {0}, {});
    const ValueSolution v = solve_feasible_bellman(mdp, RegionMask{{1}});
    EXPECT_EQ(v.value[0], 0.0);
}

TEST(FeasibleBellman, RestrictsToRegionAndContracts) {
    // Cell 0 may move to 1 (reward 1, outside the region) or stay (reward -1).
    const FiniteMdp mdp = table_mdp(2, 2, {0, 1, 1, 1}, {1}, {-1.0, 1.0, 0.0, 0.0});
    const ValueSolution v = solve_feasible_bellman(mdp, RegionMask{{1, 0}});
    EXPECT_NEAR(v.value[0], -100.0, 1e-8);
    EXPECT_EQ(v.policy[0], 0);
    EXPECT_TRUE(std::isinf(v.value[1]) && v.value[1] < 0);
    const auto& h = v.residual_history;
    for (std::size_t k = 1; k + 1 < h.size(); ++k) EXPECT_LE(h[k + 1], mdp.gamma() * h[k] + 1e-13);
}

TEST(FeasibleBellman, ResidualSeesPerturbation) {
    const FiniteMdp mdp = table_mdp(2, 2, {0, 1, 1, 1}, {1}, {-1.0, 1.0, 0.0, 0.0});
    const RegionMask region{{1, 0}};
    TabularField v = solve_feasible_bellman(mdp, region).value;
    const double base = feasible_bellman_residual(mdp, region, v);
    EXPECT_LE(base, 1e-9);
    v[0] += 1e-3;
    EXPECT_NEAR(feasible_bellman_residual(mdp, region, v), 1e-3 * (1 - mdp.gamma()), 1e-9);
}

TEST(Fpi, AllHazardConvergesImmediately) {
    const FiniteMdp mdp = table_mdp(3, 2, {0, 1, 1, 2, 2, 0}, {0, 1, 2});
    const FpiReport r = run_fpi(mdp, TabularPolicy::constant(3, 0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    for (const auto& rec : r.records) EXPECT_EQ(rec.feasible_cells, 0u);
}

TEST(Fpi, GridworldMatchesKernelAndFeasibleBellman) {
    for (const GridworldParams& layout : {gridworld_tiny(), gridworld_standard()}) {
        const EnvironmentSpec env = gridworld_env(layout);
        const FiniteMdp mdp = discretize(env, gridworld_grid(env));
        const FpiReport r = run_fpi(mdp, TabularPolicy::constant(mdp.cell_count(), 0));
        ASSERT_TRUE(r.converged);
        const RegionMask kernel = viability_kernel(mdp);
        EXPECT_EQ(r.region, kernel);
        const ValueSolution vstar = solve_feasible_bellman(mdp, kernel);
        for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
            if (!kernel.contains(s)) continue;
            EXPECT_NEAR(r.value[s], vstar.value[s], 2e-10);
        }
        for (std::size_t k = 1; k < r.records.size(); ++k) {
            EXPECT_GE(r.records[k].feasible_cells, r.records[k - 1].feasible_cells);
            EXPECT_LE(r.records[k].max_delta_f, 2e-12 / 0.01);
        }
    }
}

TEST(Fpi, IterationCapRaisesWithPartialReport) {
    const EnvironmentSpec env = gridworld_env(gridworld_standard());
    const FiniteMdp mdp = discretize(env, gridworld_grid(env));
    FpiConfig cfg;
    cfg.max_iterations = 1;
    try {
        run_fpi(mdp, TabularPolicy::constant(mdp.cell_count(), 0), cfg);
        FAIL() << "expected FpiIterationCapError";
    } catch (const FpiIterationCapError& e) {
        EXPECT_FALSE(e.report().converged);
        EXPECT_FALSE(e.report().records.empty());
    }
}

}  // namespace
}  // namespace fpi
