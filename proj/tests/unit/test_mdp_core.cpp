#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fpi/environments.hpp"
#include "fpi/mdp.hpp"

namespace fpi {
namespace {

EnvironmentSpec line_env(EnvironmentSpec::Stepper step, EnvironmentSpec::Constraint h) {
    EnvironmentSpec env;
    env.name = "line";
    env.state_dim = 1;
    env.action_dim = 1;
    env.step = std::move(step);
    env.reward = [](std::span<const double> x, std::span<const double> a) { return -x[0] - a[0]; };
    env.constraint = std::move(h);
    env.state_domain = Box{{0.0}, {1.0}};
    env.action_domain = Box{{0.0}, {1.0}};
    return env;
}

GridSpec line_grid(std::size_t cells, std::vector<Vec> actions = {{0.0}}) {
    return GridSpec({Axis{0.0, 1.0, cells}}, std::move(actions));
}

TEST(Grid, CenterNearestRoundTrip) {
    const GridSpec g({Axis{-15.0, 15.0, 201}, Axis{-6.0, 6.0, 201}}, {{0.0}});
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Vec x = g.center(c);
        ASSERT_EQ(g.nearest_cell(x), c);
    }
    const GridSpec g3({Axis{0.0, 1.0, 3}, Axis{0.0, 2.0, 4}, Axis{-1.0, 1.0, 5}}, {{0.0}});
    for (std::size_t c = 0; c < g3.cell_count(); ++c) EXPECT_EQ(g3.nearest_cell(g3.center(c)), c);
}

TEST(Grid, FlatIndexIsRowMajorDimensionZeroSlowest) {
    const GridSpec g({Axis{0.0, 1.0, 3}, Axis{0.0, 1.0, 4}}, {{0.0}});
    const std::vector<std::size_t> idx{2, 1};
    EXPECT_EQ(g.flatten(idx), 9u);
    EXPECT_EQ(g.unflatten(9), idx);
    EXPECT_DOUBLE_EQ(g.center(9)[0], 1.0);
    EXPECT_DOUBLE_EQ(g.center(9)[1], 1.0 / 3.0);
}

TEST(Grid, ClampsOutsidePoints) {
    const GridSpec g = line_grid(5);
    EXPECT_EQ(g.nearest_cell(std::vector<double>{7.0}), 4u);
    EXPECT_EQ(g.nearest_cell(std::vector<double>{-3.0}), 0u);
}

TEST(Grid, HalfwayTieGoesToLowerIndex) {
    const GridSpec g = line_grid(5);  // centers 0, .25, .5, .75, 1
    EXPECT_EQ(g.nearest_cell(std::vector<double>{0.125}), 0u);
    EXPECT_EQ(g.nearest_cell(std::vector<double>{0.625}), 2u);
    EXPECT_EQ(g.nearest_cell(std::vector<double>{0.6250001}), 3u);
}

TEST(Grid, RejectsDegenerateAxes) {
    EXPECT_THROW(GridSpec({Axis{0.0, 1.0, 1}}, {{0.0}}), std::invalid_argument);
    EXPECT_THROW(GridSpec({Axis{1.0, 1.0, 4}}, {{0.0}}), std::invalid_argument);
    EXPECT_THROW(GridSpec({Axis{0.0, 1.0, 4}}, {}), std::invalid_argument);
}

TEST(Grid, ActionGridProduct) {
    const std::vector<double> lo{-1.0, 0.0}, hi{1.0, 2.0};
    const std::vector<std::size_t> n{3, 1};
    const auto acts = make_action_grid(lo, hi, n);
    ASSERT_EQ(acts.size(), 3u);
    EXPECT_EQ(acts[0], (Vec{-1.0, 1.0}));
    EXPECT_EQ(acts[1], (Vec{0.0, 1.0}));
    EXPECT_EQ(acts[2], (Vec{1.0, 1.0}));
}

TEST(Discretize, IdentityDynamicsMapsEachCellToItself) {
    const auto env = line_env([](std::span<const double> x, std::span<const double>) { return Vec{x[0]}; },
                              [](std::span<const double>) { return Vec{-1.0}; });
    const FiniteMdp mdp = discretize(env, line_grid(2));
    EXPECT_EQ(mdp.successor(0, 0), 0);
    EXPECT_EQ(mdp.successor(1, 0), 1);
}

TEST(Discretize, OverflowClampsToBoundaryCell) {
    const auto env = line_env([](std::span<const double> x, std::span<const double>) { return Vec{x[0] + 10.0}; },
                              [](std::span<const double>) { return Vec{-1.0}; });
    const FiniteMdp mdp = discretize(env, line_grid(4));
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(mdp.successor(c, 0), 3);
}

TEST(Discretize, RewardAndViolationAtCenters) {
    const auto env = line_env([](std::span<const double> x, std::span<const double>) { return Vec{x[0]}; },
                              [](std::span<const double> x) { return Vec{x[0] - 0.5}; });
    const FiniteMdp mdp = discretize(env, line_grid(5, {{0.0}, {1.0}}));
    EXPECT_DOUBLE_EQ(mdp.reward(1, 1), -1.25);
    EXPECT_FALSE(mdp.violates(2));  // h = 0 is safe
    EXPECT_TRUE(mdp.violates(3));
    const RegionMask safe = constraint_indicator(mdp);
    EXPECT_EQ(safe.count(), 3u);
    EXPECT_EQ(mdp.initial_cells().size(), 3u);
}

TEST(Discretize, AnyPositiveComponentViolates) {
    const auto env = line_env([](std::span<const double> x, std::span<const double>) { return Vec{x[0]}; },
                              [](std::span<const double> x) { return Vec{-1.0, x[0] - 0.75}; });
    const FiniteMdp mdp = discretize(env, line_grid(5));
    EXPECT_FALSE(mdp.violates(3));
    EXPECT_TRUE(mdp.violates(4));
}

TEST(Discretize, ConstraintIndicatorExamples) {
    for (const auto& [h, safe] : std::vector<std::pair<double, bool>>{{-1.0, true}, {0.0, true}, {0.5, false}}) {
        const auto env = line_env([](std::span<const double> x, std::span<const double>) { return Vec{x[0]}; },
                                  [h](std::span<const double>) { return Vec{h}; });
        const RegionMask m = constraint_indicator(discretize(env, line_grid(2)));
        EXPECT_EQ(m.contains(0), safe) << "h = " << h;
    }
}

TEST(Discretize, NonFiniteDynamicsRejected) {
    const auto env = line_env([](std::span<const double>, std::span<const double>) { return Vec{std::nan("")}; },
                              [](std::span<const double>) { return Vec{-1.0}; });
    EXPECT_THROW(discretize(env, line_grid(3)), std::domain_error);
}

TEST(Discretize, AccStoresDiscountAndIsDeterministic) {
    const EnvironmentSpec env = acc_env();
    const std::vector<std::size_t> cells{31, 21}, acts{5};
    const GridSpec grid = make_grid(env, cells, acts);
    const FiniteMdp a = discretize(env, grid, 0.99);
    const FiniteMdp b = discretize(env, grid, 0.99);
    EXPECT_DOUBLE_EQ(a.gamma(), 0.99);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.cell_count(), 31u * 21u);
    EXPECT_EQ(a.action_count(), 5u);
}

TEST(FiniteMdp, RejectsMalformedTables) {
    EXPECT_THROW(FiniteMdp(2, 1, {0, 2}, {0.0, 0.0}, {0, 0}, 0.99), std::invalid_argument);
    EXPECT_THROW(FiniteMdp(2, 1, {0, 1}, {0.0}, {0, 0}, 0.99), std::invalid_argument);
    EXPECT_THROW(FiniteMdp(2, 1, {0, 1}, {0.0, 0.0}, {0, 0}, 1.0), std::invalid_argument);
    const FiniteMdp ok(2, 2, {0, 1, 1, 0}, {0.0, 0.0, 0.0, 0.0}, {0, 1}, 0.9);
    EXPECT_THROW(ok.check_policy(TabularPolicy{{0, 2}}), std::invalid_argument);
    EXPECT_THROW(ok.check_policy(TabularPolicy{{0}}), std::invalid_argument);
}

}  // namespace
}  // namespace fpi
