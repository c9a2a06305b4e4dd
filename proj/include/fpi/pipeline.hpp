#pragma once

#include <iosfwd>
#include <string>

#include "fpi/environments.hpp"
#include "fpi/field_io.hpp"
#include "fpi/mdp.hpp"
#include "fpi/run_config.hpp"

namespace fpi {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitUsage = 2,
};

struct Problem {
    EnvironmentSpec env;
    GridSpec grid;
    FiniteMdp mdp;
};

/// Environment, grid and induced MDP described by `cfg`.
Problem build_problem(const RunConfig& cfg);

/// Config entries, environment parameters ("env.*") and grid geometry.
ArtifactHeader artifact_header(const RunConfig& cfg, const Problem& problem);

/// Runs FPI and writes into cfg.output_dir:
///   config.yaml          effective configuration
///   report.json          per-iteration records, kernel comparison, rollout audit
///   fields/F_NNNN.csv, fields/V_NNNN.csv, fields/region_NNNN.csv per iteration
///   fields/kernel.csv    viability kernel of the induced MDP
///   policy.csv           converged policy
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Randomized invariant suite; exit 0 iff every check passes.
int cmd_verify(const RunConfig& cfg, bool corrupt_cdf, std::ostream& out, std::ostream& err);

/// Viability kernel and optimal CDF of the configured MDP, written to
/// cfg.output_dir (kernel.csv, kernel.pgm, F_star.csv, F_star.pgm).
int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Heatmaps of a completed solve run under run_dir/images: F, V and
/// boundary-marked region per iteration, optionally the barrier overlay.
int cmd_export(const std::string& run_dir, bool cbf_overlay, std::ostream& out, std::ostream& err);

}  // namespace fpi
