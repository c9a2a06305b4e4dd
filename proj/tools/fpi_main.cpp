// fpi: feasible policy iteration on discretized deterministic MDPs.
//
//   fpi solve  --env gridworld --preset tiny --out run_tiny
//   fpi solve  --config presets/acc.yaml
//   fpi verify --seed 7 --count 100
//   fpi oracle --env pendulum --grid 101 101
//   fpi export run_acc --cbf
//
// Command-line flags override values loaded from --config.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpi/parallel.hpp"
#include "fpi/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> env;
    std::optional<std::string> preset;
    std::vector<std::string> params;
    std::vector<std::size_t> grid;
    std::vector<std::size_t> actions;
    std::optional<double> gamma, p, eps_fp, eps_v, t0, t_factor, tie_tolerance;
    std::optional<std::string> mode;
    std::optional<std::size_t> t_period, max_iterations, horizon, count;
    std::optional<int> initial_action;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

void add_config_flags(CLI::App* cmd, Overrides& o, bool solver_flags) {
    cmd->add_option("--config", o.config, "YAML run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--gamma", o.gamma, "discount factor");
    cmd->add_option("--p", o.p, "feasibility threshold");
    cmd->add_option("--eps-fp", o.eps_fp, "CDF fixed-point tolerance");
    cmd->add_option("--eps-v", o.eps_v, "value-iteration tolerance");
    cmd->add_option("--tie-tolerance", o.tie_tolerance, "score margin needed to replace the incumbent action");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "random seed");
    if (!solver_flags) {
        cmd->add_option("--count", o.count, "number of random MDPs");
        return;
    }
    cmd->add_option("--env", o.env, "acc | pendulum | gridworld");
    cmd->add_option("--preset", o.preset, "gridworld layout: tiny | standard");
    cmd->add_option("--param", o.params, "environment parameter override key=value")->take_all();
    cmd->add_option("--grid", o.grid, "cells per state dimension");
    cmd->add_option("--actions", o.actions, "samples per action dimension");
    cmd->add_option("--mode", o.mode, "exact | barrier");
    cmd->add_option("--t0", o.t0, "initial barrier parameter");
    cmd->add_option("--t-factor", o.t_factor, "barrier growth factor");
    cmd->add_option("--t-period", o.t_period, "iterations between barrier growth steps");
    cmd->add_option("--max-iterations", o.max_iterations, "FPI iteration cap (0: automatic)");
    cmd->add_option("--initial-action", o.initial_action, "action of the constant initial policy");
    cmd->add_option("--horizon", o.horizon, "rollout audit length");
}

fpi::RunConfig resolve(const Overrides& o) {
    fpi::RunConfig cfg = o.config ? fpi::load_run_config(*o.config) : fpi::RunConfig{};
    if (o.env) cfg.env = *o.env;
    if (o.preset) cfg.preset = *o.preset;
    for (const std::string& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw fpi::ConfigError("--param expects key=value, got '" + kv + "'");
        try {
            std::size_t used = 0;
            const std::string value = kv.substr(eq + 1);
            cfg.params[kv.substr(0, eq)] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw fpi::ConfigError("--param '" + kv + "' has a non-numeric value");
        }
    }
    if (!o.grid.empty()) cfg.grid = o.grid;
    if (!o.actions.empty()) cfg.actions = o.actions;
    if (o.gamma) cfg.gamma = *o.gamma;
    if (o.p) cfg.p = *o.p;
    if (o.eps_fp) cfg.eps_fp = *o.eps_fp;
    if (o.eps_v) cfg.eps_v = *o.eps_v;
    if (o.mode) cfg.mode = fpi::parse_mode(*o.mode);
    if (o.t0) cfg.t0 = *o.t0;
    if (o.t_factor) cfg.t_factor = *o.t_factor;
    if (o.t_period) cfg.t_period = *o.t_period;
    if (o.tie_tolerance) cfg.tie_tolerance = *o.tie_tolerance;
    if (o.max_iterations) cfg.max_iterations = *o.max_iterations;
    if (o.initial_action) cfg.initial_action = *o.initial_action;
    if (o.horizon) cfg.horizon = *o.horizon;
    if (o.out) cfg.output_dir = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.count) cfg.verify_count = *o.count;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feasible policy iteration on discretized deterministic MDPs"};
    app.require_subcommand(1);
    app.footer("Worker threads: set FPI_WORKERS (default: all cores).");

    Overrides solve_o, verify_o, oracle_o;
    auto* solve = app.add_subcommand("solve", "run FPI and write fields, policy and report");
    add_config_flags(solve, solve_o, true);
    auto* verify = app.add_subcommand("verify", "randomized invariant suite on small MDPs");
    add_config_flags(verify, verify_o, false);
    bool corrupt = false;
    verify->add_flag("--corrupt", corrupt, "negative control: corrupt every computed CDF");
    auto* oracle = app.add_subcommand("oracle", "viability kernel and optimal CDF of the configured MDP");
    add_config_flags(oracle, oracle_o, true);
    auto* exporter = app.add_subcommand("export", "PGM heatmaps of a completed solve run");
    std::string run_dir;
    bool cbf = false;
    exporter->add_option("run_dir", run_dir, "directory written by solve")->required();
    exporter->add_flag("--cbf", cbf, "also write the barrier-function overlay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? fpi::kExitOk : fpi::kExitUsage;
    }

    try {
        fpi::configure_workers_from_env();
    } catch (const std::exception& e) {
        std::cerr << "fpi: " << e.what() << '\n';
        return fpi::kExitUsage;
    }

    try {
        if (*exporter) return fpi::cmd_export(run_dir, cbf, std::cout, std::cerr);
        if (*verify) {
            const fpi::RunConfig cfg = resolve(verify_o);
            return fpi::cmd_verify(cfg, corrupt, std::cout, std::cerr);
        }
        const Overrides& o = *solve ? solve_o : oracle_o;
        const fpi::RunConfig cfg = resolve(o);
        if (cfg.env.empty()) {
            std::cerr << "fpi: an environment is required (--env or 'env' in --config)\n";
            return fpi::kExitUsage;
        }
        return *solve ? fpi::cmd_solve(cfg, std::cout, std::cerr) : fpi::cmd_oracle(cfg, std::cout, std::cerr);
    } catch (const fpi::ConfigError& e) {
        std::cerr << "fpi: " << e.what() << '\n';
        return fpi::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "fpi: " << e.what() << '\n';
        return fpi::kExitCheckFailed;
    }
}
