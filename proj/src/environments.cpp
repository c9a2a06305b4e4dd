#include "fpi/environments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace fpi {

namespace {

// Applies overrides to named fields; any key not in `fields` is an error.
void apply_overrides(const ParameterBag& overrides,
                     std::initializer_list<std::pair<const char*, double*>> fields,
                     const std::string& env) {
    for (const auto& [key, value] : overrides) {
        bool found = false;
        for (const auto& [name, target] : fields) {
            if (key == name) {
                *target = value;
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument(env + ": unknown parameter '" + key + "'");
        }
    }
}

void require_positive(double v, const char* what, const std::string& env) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(env + ": parameter '" + what + "' must be positive");
    }
}

}  // namespace

AccParams AccParams::from_bag(const ParameterBag& overrides) {
    AccParams p;
    apply_overrides(overrides,
                    {{"dt", &p.dt},
                     {"ds_max", &p.ds_max},
                     {"a_max", &p.a_max},
                     {"ds_range", &p.ds_range},
                     {"dv_range", &p.dv_range}},
                    "acc");
    return p;
}

EnvironmentSpec acc_env(const AccParams& p) {
    require_positive(p.dt, "dt", "acc");
    require_positive(p.ds_max, "ds_max", "acc");
    require_positive(p.a_max, "a_max", "acc");
    require_positive(p.ds_range, "ds_range", "acc");
    require_positive(p.dv_range, "dv_range", "acc");

    EnvironmentSpec env;
    env.name = "acc";
    env.state_dim = 2;
    env.action_dim = 1;
    const double dt = p.dt;
    env.step = [dt](std::span<const double> x, std::span<const double> u) {
        return Vec{x[0] + dt * x[1], x[1] - dt * u[0]};
    };
    env.reward = [](std::span<const double> x, std::span<const double> u) {
        return -0.001 * x[0] * x[0] - 0.01 * x[1] * x[1] - u[0] * u[0];
    };
    const double ds_max = p.ds_max;
    env.constraint = [ds_max](std::span<const double> x) { return Vec{std::abs(x[0]) - ds_max}; };
    env.params = {{"dt", p.dt},
                  {"ds_max", p.ds_max},
                  {"a_max", p.a_max},
                  {"ds_range", p.ds_range},
                  {"dv_range", p.dv_range}};
    env.state_domain = Box{{-p.ds_range, -p.dv_range}, {p.ds_range, p.dv_range}};
    env.action_domain = Box{{-p.a_max}, {p.a_max}};
    return env;
}

PendulumParams PendulumParams::from_bag(const ParameterBag& overrides) {
    PendulumParams p;
    apply_overrides(overrides,
                    {{"dt", &p.dt},
                     {"mass", &p.mass},
                     {"length", &p.length},
                     {"gravity", &p.gravity},
                     {"tau_max", &p.tau_max},
                     {"theta_max", &p.theta_max},
                     {"theta_range", &p.theta_range},
                     {"omega_range", &p.omega_range}},
                    "pendulum");
    return p;
}

EnvironmentSpec pendulum_env(const PendulumParams& p) {
    require_positive(p.dt, "dt", "pendulum");
    require_positive(p.mass, "mass", "pendulum");
    require_positive(p.length, "length", "pendulum");
    require_positive(p.gravity, "gravity", "pendulum");
    require_positive(p.tau_max, "tau_max", "pendulum");
    require_positive(p.theta_max, "theta_max", "pendulum");
    require_positive(p.theta_range, "theta_range", "pendulum");
    require_positive(p.omega_range, "omega_range", "pendulum");

    EnvironmentSpec env;
    env.name = "pendulum";
    env.state_dim = 2;
    env.action_dim = 1;
    const double dt = p.dt;
    const double g_over_l = p.gravity / p.length;
    const double inv_inertia = 1.0 / (p.mass * p.length * p.length);
    env.step = [=](std::span<const double> x, std::span<const double> u) {
        const double accel = g_over_l * std::sin(x[0]) + inv_inertia * u[0];
        return Vec{x[0] + dt * x[1], x[1] + dt * accel};
    };
    env.reward = [](std::span<const double> x, std::span<const double> u) {
        return -0.1 * x[0] * x[0] - 0.01 * x[1] * x[1] - u[0] * u[0];
    };
    const double theta_max = p.theta_max;
    env.constraint = [theta_max](std::span<const double> x) { return Vec{std::abs(x[0]) - theta_max}; };
    env.params = {{"dt", p.dt},
                  {"mass", p.mass},
                  {"length", p.length},
                  {"gravity", p.gravity},
                  {"tau_max", p.tau_max},
                  {"theta_max", p.theta_max},
                  {"theta_range", p.theta_range},
                  {"omega_range", p.omega_range}};
    env.state_domain = Box{{-p.theta_range, -p.omega_range}, {p.theta_range, p.omega_range}};
    env.action_domain = Box{{-p.tau_max}, {p.tau_max}};
    return env;
}

EnvironmentSpec gridworld_env(const GridworldParams& p) {
    if (p.width < 2 || p.height < 2) {
        throw std::invalid_argument("gridworld: width and height must be at least 2");
    }
    auto inside = [&](GridCoord c) { return c.x >= 0 && c.x < p.width && c.y >= 0 && c.y < p.height; };
    if (!inside(p.goal)) throw std::invalid_argument("gridworld: goal outside the grid");
    std::set<std::pair<int, int>> hazards;
    for (GridCoord h : p.hazards) {
        if (!inside(h)) throw std::invalid_argument("gridworld: hazard outside the grid");
        hazards.insert({h.x, h.y});
    }
    std::map<std::pair<int, int>, std::pair<int, int>> winds;
    for (const Wind& w : p.winds) {
        if (!inside(w.cell)) throw std::invalid_argument("gridworld: wind cell outside the grid");
        winds[{w.cell.x, w.cell.y}] = {w.dx, w.dy};
    }

    EnvironmentSpec env;
    env.name = "gridworld";
    env.state_dim = 2;
    env.action_dim = 2;
    if (p.include_stay) env.discrete_actions.push_back({0.0, 0.0});
    env.discrete_actions.insert(env.discrete_actions.end(),
                                {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
    if (p.diagonal_moves) {
        env.discrete_actions.insert(env.discrete_actions.end(),
                                    {{1.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}});
    }

    const int width = p.width;
    const int height = p.height;
    env.step = [=](std::span<const double> x, std::span<const double> u) {
        const int cx = static_cast<int>(std::lround(x[0]));
        const int cy = static_cast<int>(std::lround(x[1]));
        int nx = cx + static_cast<int>(std::lround(u[0]));
        int ny = cy + static_cast<int>(std::lround(u[1]));
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) {
            nx = cx;
            ny = cy;
        }
        if (auto it = winds.find({cx, cy}); it != winds.end()) {
            nx = std::clamp(nx + it->second.first, 0, width - 1);
            ny = std::clamp(ny + it->second.second, 0, height - 1);
        }
        return Vec{static_cast<double>(nx), static_cast<double>(ny)};
    };
    const double gx = p.goal.x;
    const double gy = p.goal.y;
    const double wd = p.distance_weight;
    const double wm = p.move_cost;
    env.reward = [=](std::span<const double> x, std::span<const double> u) {
        const double dist = std::abs(x[0] - gx) + std::abs(x[1] - gy);
        const bool moves = u[0] != 0.0 || u[1] != 0.0;
        return -wd * dist - (moves ? wm : 0.0);
    };
    env.constraint = [hazards](std::span<const double> x) {
        const int cx = static_cast<int>(std::lround(x[0]));
        const int cy = static_cast<int>(std::lround(x[1]));
        return Vec{hazards.contains({cx, cy}) ? 1.0 : -1.0};
    };
    env.params = {{"width", static_cast<double>(p.width)},
                  {"height", static_cast<double>(p.height)},
                  {"goal_x", gx},
                  {"goal_y", gy},
                  {"hazard_count", static_cast<double>(hazards.size())},
                  {"wind_count", static_cast<double>(winds.size())},
                  {"include_stay", p.include_stay ? 1.0 : 0.0},
                  {"diagonal_moves", p.diagonal_moves ? 1.0 : 0.0},
                  {"distance_weight", p.distance_weight},
                  {"move_cost", p.move_cost}};
    env.state_domain = Box{{0.0, 0.0}, {static_cast<double>(p.width - 1), static_cast<double>(p.height - 1)}};
    env.action_domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
    return env;
}

GridSpec gridworld_grid(const EnvironmentSpec& env) {
    const auto w = static_cast<std::size_t>(env.params.at("width"));
    const auto h = static_cast<std::size_t>(env.params.at("height"));
    const std::size_t cells[] = {w, h};
    return make_grid(env, cells, {});
}

GridworldParams gridworld_tiny() {
    GridworldParams p;
    p.width = 5;
    p.height = 5;
    p.goal = {4, 0};
    for (int x = 1; x <= 3; ++x) {
        p.hazards.push_back({x, 0});
        p.winds.push_back({{x, 1}, 0, -2});
    }
    return p;
}

GridworldParams gridworld_standard() {
    GridworldParams p;
    p.width = 11;
    p.height = 11;
    p.goal = {10, 0};
    for (int x = 3; x <= 7; ++x) {
        p.hazards.push_back({x, 0});
        p.winds.push_back({{x, 1}, 0, -2});
        p.winds.push_back({{x, 2}, 0, -2});
    }
    for (int y = 5; y <= 9; ++y) p.hazards.push_back({5, y});
    p.hazards.push_back({8, 6});
    return p;
}

EnvironmentSpec make_environment(const std::string& name, const ParameterBag& overrides,
                                 const std::string& gridworld_preset) {
    if (name == "acc") return acc_env(AccParams::from_bag(overrides));
    if (name == "pendulum") return pendulum_env(PendulumParams::from_bag(overrides));
    if (name == "gridworld") {
        GridworldParams p;
        if (gridworld_preset == "tiny") {
            p = gridworld_tiny();
        } else if (gridworld_preset == "standard") {
            p = gridworld_standard();
        } else {
            throw std::invalid_argument("gridworld: unknown preset '" + gridworld_preset + "'");
        }
        apply_overrides(overrides, {{"distance_weight", &p.distance_weight}, {"move_cost", &p.move_cost}},
                        "gridworld");
        return gridworld_env(p);
    }
    throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace fpi
