#include <gtest/gtest.h>

#include <cmath>

#include "../support.hpp"
#include "fpi/oracle.hpp"
#include "fpi/random_mdp.hpp"

namespace fpi {
namespace {

using testing::table_mdp;

TEST(ViabilityKernel, NoHazardsAndAllHazards) {
    EXPECT_EQ(viability_kernel(table_mdp(3, 1, {1, 2, 0}, {})).count(), 3u);
    EXPECT_EQ(viability_kernel(table_mdp(3, 1, {1, 2, 0}, {0, 1, 2})).count(), 0u);
}

TEST(ViabilityKernel, ThreeStateChain) {
    const FiniteMdp mdp = table_mdp(3, 2, {0, 1, 0, 2, 2, 2}, {2});
    EXPECT_EQ(viability_kernel(mdp).members, (std::vector<std::uint8_t>{1, 1, 0}));
}

TEST(ViabilityKernel, MatchesSubsetEnumeration) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const FiniteMdp mdp = random_mdp(seed);
        EXPECT_EQ(viability_kernel(mdp).members, testing::brute_force_kernel(mdp)) << "seed " << seed;
    }
}

TEST(ViabilityKernel, AddingAHazardNeverGrowsIt) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const FiniteMdp mdp = random_mdp(seed);
        const RegionMask base = viability_kernel(mdp);
        for (std::size_t h = 0; h < mdp.cell_count(); ++h) {
            std::vector<std::uint8_t> flags(mdp.violation_flags().begin(), mdp.violation_flags().end());
            flags[h] = 1;
            const FiniteMdp more(mdp.cell_count(), mdp.action_count(),
                                 {mdp.successors().begin(), mdp.successors().end()},
                                 {mdp.rewards().begin(), mdp.rewards().end()}, flags, mdp.gamma());
            EXPECT_TRUE(viability_kernel(more).subset_of(base));
        }
    }
}

TEST(Rollout, StepCounts) {
    const FiniteMdp mdp = table_mdp(5, 1, {1, 2, 3, 3, 4}, {3});
    const auto pi = TabularPolicy::constant(5, 0);
    EXPECT_EQ(rollout_steps_to_violation(mdp, pi, 3, 100), 0);
    EXPECT_EQ(rollout_steps_to_violation(mdp, pi, 4, 100), kNeverViolates);
    EXPECT_EQ(rollout_steps_to_violation(mdp, pi, 0, 100), 3);
    EXPECT_EQ(steps_to_violation(mdp, pi), (std::vector<StepCount>{3, 2, 1, 0, kNeverViolates}));
    const TabularField f = cdf_from_steps(mdp, steps_to_violation(mdp, pi));
    EXPECT_NEAR(f[0], std::pow(0.99, 3), 1e-15);
    EXPECT_EQ(f[4], 0.0);
}

TEST(Rollout, StepsMatchWalk) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const FiniteMdp mdp = random_mdp(seed);
        std::mt19937_64 rng(seed);
        const auto pi = random_policy(rng, mdp.cell_count(), mdp.action_count());
        const auto steps = steps_to_violation(mdp, pi);
        for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
            const std::int64_t n = testing::walk_steps(mdp, pi.actions, s);
            EXPECT_EQ(steps[s], n < 0 ? kNeverViolates : n);
            EXPECT_EQ(rollout_steps_to_violation(mdp, pi, s, 1000), steps[s]);
        }
    }
}

TEST(Enumerate, SmallCases) {
    EXPECT_EQ(enumerate_optimal_cdf(table_mdp(1, 1, {0}, {})).values, (std::vector<double>{0.0}));
    EXPECT_EQ(enumerate_optimal_cdf(table_mdp(1, 1, {0}, {0})).values, (std::vector<double>{1.0}));
    RandomMdpOptions opts;
    opts.max_cells = 6;
    opts.max_actions = 3;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const FiniteMdp mdp = random_mdp(seed, opts);
        EXPECT_EQ(enumerate_optimal_cdf(mdp).values, testing::brute_force_optimal_cdf(mdp)) << "seed " << seed;
    }
}

TEST(Enumerate, BudgetEnforced) {
    RandomMdpOptions opts;
    opts.min_cells = 12;
    opts.max_cells = 12;
    opts.min_actions = 4;
    opts.max_actions = 4;
    EXPECT_THROW(enumerate_optimal_cdf(random_mdp(3, opts), 1000), std::length_error);
}

TEST(UnsafeRollouts, ReportsViolatingStarts) {
    const FiniteMdp mdp = table_mdp(5, 1, {1, 2, 3, 3, 4}, {3});
    const auto pi = TabularPolicy::constant(5, 0);
    const RegionMask all{{1, 1, 1, 0, 1}};
    EXPECT_EQ(unsafe_rollout_starts(mdp, pi, all, 2), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(unsafe_rollout_starts(mdp, pi, all, 3), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RandomMdp, SeededAndBounded) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const FiniteMdp a = random_mdp(seed), b = random_mdp(seed);
        EXPECT_TRUE(a == b);
        EXPECT_LE(a.cell_count(), 12u);
        EXPECT_LE(a.action_count(), 4u);
    }
}

}  // namespace
}  // namespace fpi
