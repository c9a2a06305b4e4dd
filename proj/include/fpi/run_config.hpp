#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpi/environment.hpp"
#include "fpi/field_io.hpp"
#include "fpi/planning.hpp"

namespace fpi {

inline constexpr int kConfigSchemaVersion = 1;

/// Everything a CLI run needs. Defaults are the documented file defaults;
/// solvers never substitute their own.
///
/// YAML schema (version 1), every key optional:
///
///   schema_version: 1
///   env: acc | pendulum | gridworld
///   preset: standard            # gridworld layout: tiny | standard
///   params: {dt: 0.1, ...}      # environment parameter overrides
///   grid: [201, 201]            # cells per state dimension (1 value broadcasts;
///                               # ignored by gridworld, whose layout fixes it)
///   actions: [41]               # samples per action dimension (ignored by gridworld)
///   gamma: 0.99
///   p: 0.1                      # feasibility threshold
///   eps_fp: 1.0e-12             # CDF fixed-point tolerance
///   eps_v: 1.0e-10              # value-iteration tolerance
///   mode: exact | barrier
///   t0: 1.0
///   t_factor: 1.1
///   t_period: 1
///   tie_tolerance: 1.0e-9
///   max_iterations: 0           # 0: cells * actions + 1
///   initial_action: 0           # constant initial policy
///   horizon: 200                # rollout safety audit length
///   output_dir: run
///   seed: 1
///   verify_count: 100
///   verify_max_cells: 12
///   verify_max_actions: 4
struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::string env;
    std::string preset = "standard";
    ParameterBag params;
    std::vector<std::size_t> grid{201, 201};
    std::vector<std::size_t> actions{41};
    double gamma = 0.99;
    double p = 0.1;
    double eps_fp = 1e-12;
    double eps_v = 1e-10;
    ImprovementMode mode = ImprovementMode::ExactConstrained;
    double t0 = 1.0;
    double t_factor = 1.1;
    std::size_t t_period = 1;
    double tie_tolerance = 1e-9;
    std::size_t max_iterations = 0;
    int initial_action = 0;
    std::size_t horizon = 200;
    std::string output_dir = "run";
    std::uint64_t seed = 1;
    std::size_t verify_count = 100;
    std::size_t verify_max_cells = 12;
    std::size_t verify_max_actions = 4;

    /// Throws ConfigError on any invariant violation.
    void validate() const;

    FpiConfig solver_config() const;

    /// Effective configuration as ordered header entries ("config.*").
    ArtifactHeader header() const;
    /// YAML text that parses back to an identical RunConfig.
    std::string to_yaml() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses YAML text; errors name the offending field and line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::string to_string(ImprovementMode mode);
ImprovementMode parse_mode(const std::string& text);

}  // namespace fpi
