#include "fpi/verification.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "fpi/feasibility.hpp"
#include "fpi/field_io.hpp"
#include "fpi/oracle.hpp"
#include "fpi/planning.hpp"
#include "fpi/random_mdp.hpp"

namespace fpi {

namespace {

struct Check {
    const char* name;
    const char* property;
};

constexpr Check kChecks[] = {
    {"cdf.range", "CDF values lie in [0, 1]"},
    {"cdf.self_consistency", "policy CDF residual <= eps_fp"},
    {"cdf.contraction", "residual ratios <= gamma"},
    {"cdf.rollout", "F matches gamma^N of oracle rollouts"},
    {"cdf.monotone_operator", "F <= G implies D F <= D G"},
    {"risky.dominance", "F* <= F^pi for sampled policies"},
    {"risky.kernel_agreement", "{F* < p} equals the viability kernel"},
    {"risky.enumeration", "F* equals min over all policies"},
    {"kernel.closure", "every kernel cell keeps a successor in the kernel"},
    {"kernel.antimonotone", "adding a hazard never grows the kernel"},
    {"fpi.feasibility_enhancement", "F_{k+1} <= F_k + 2 eps_fp / (1 - gamma)"},
    {"fpi.monotone_expansion", "feasible region never shrinks"},
    {"fpi.value_improvement", "V_{k+1} >= V_k - 2 eps_V / (1 - gamma) on X_k"},
    {"fpi.risky_fixed_point", "converged F has risky Bellman residual <= eps_fp"},
    {"fpi.feasible_fixed_point", "converged V has feasible Bellman residual <= 1e-9"},
    {"fpi.bellman_agreement", "converged V matches feasible Bellman solve within 2 eps_V"},
    {"fpi.kernel_agreement", "converged region equals the viability kernel"},
    {"fpi.safe_rollouts", "converged policy never leaves the region in S steps"},
    {"barrier.feasibility", "barrier choices keep F(successor) < p"},
    {"barrier.limit", "t = 1e6 barrier matches exact improvement on >= 99% of region"},
};

class Recorder {
public:
    Recorder() {
        for (const Check& c : kChecks) {
            index_[c.name] = tallies_.size();
            tallies_.push_back(CheckTally{c.name, c.property, 0, 0, {}});
        }
    }

    // Returns ok, recording a failure message on the first failure only.
    bool record(const char* name, bool ok, const std::function<std::string()>& detail) {
        CheckTally& t = tallies_[index_.at(name)];
        if (ok) {
            ++t.passed;
        } else {
            if (t.failed == 0) t.first_failure = detail();
            ++t.failed;
        }
        return ok;
    }

    std::vector<CheckTally> take() { return std::move(tallies_); }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<CheckTally> tallies_;
};

std::string describe(std::uint64_t seed, const std::string& what) {
    return "mdp seed " + std::to_string(seed) + ": " + what;
}

bool residual_ratios_ok(const std::vector<double>& history, double gamma) {
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k] > (gamma + 1e-9) * history[k - 1]) return false;
    }
    return true;
}

// Returns false if any check failed for this MDP.
bool verify_one(const FiniteMdp& mdp, std::uint64_t mdp_seed, const VerificationOptions& o, Recorder& rec) {
    bool ok = true;
    auto check = [&](const char* name, bool pass, const std::function<std::string()>& detail) {
        ok = rec.record(name, pass, [&] { return describe(mdp_seed, detail()); }) && ok;
    };

    const std::size_t S = mdp.cell_count();
    const std::size_t A = mdp.action_count();
    const double gamma = mdp.gamma();
    const double band = o.eps_fp / (1.0 - gamma);
    FixedPointConfig fp;
    fp.tolerance = o.eps_fp;
    std::mt19937_64 rng(mdp_seed ^ 0x9e3779b97f4a7c15ULL);

    // Policy CDFs: range, self-consistency, contraction, rollout agreement.
    const CdfSolution fstar = solve_risky_bellman(mdp, fp);
    const std::size_t H = horizon_cap(gamma, o.eps_fp);
    bool dominance = true;
    std::string dominance_detail;
    bool range_ok = true, contraction_ok = true;
    double worst_residual = 0.0;
    for (std::size_t i = 0; i < o.sampled_policies; ++i) {
        const TabularPolicy pi = random_policy(rng, S, A);
        CdfSolution sol = identify_feasible_region(mdp, pi, fp);
        if (o.corrupt_cdf) {
            for (std::size_t s = 0; s < S; ++s) sol.cdf[s] = std::min(1.0, sol.cdf[s] + 0.25);
        }
        range_ok = range_ok && sol.cdf.range_ok();
        worst_residual = std::max(worst_residual, cdf_self_consistency_residual(mdp, pi, sol.cdf));
        contraction_ok = contraction_ok && residual_ratios_ok(sol.residual_history, gamma);
        if (i == 0) {

            const auto steps = steps_to_violation(mdp, pi);
            bool rollout_ok = true;
            for (std::size_t s = 0; s < S; ++s) {
                if (steps[s] != kNeverViolates && static_cast<std::size_t>(steps[s]) <= H) {
                    rollout_ok = rollout_ok &&
                                 std::abs(sol.cdf[s] - std::pow(gamma, static_cast<double>(steps[s]))) <= band;
                } else {
                    rollout_ok = rollout_ok && sol.cdf[s] <= std::pow(gamma, static_cast<double>(H)) + band;
                }
            }
            check("cdf.rollout", rollout_ok, [] { return std::string("CDF disagrees with rollout step count"); });

            // Monotone operators on a random ordered pair F <= G.
            TabularField lo = TabularField::filled(FieldKind::Cdf, S, 0.0);
            TabularField hi = lo;
            for (std::size_t s = 0; s < S; ++s) {
                lo[s] = uniform_unit(rng);
                hi[s] = lo[s] + (1.0 - lo[s]) * uniform_unit(rng);
            }
            const TabularField dlo = apply_cdf_operator(mdp, pi, lo);
            const TabularField dhi = apply_cdf_operator(mdp, pi, hi);
            const TabularField rlo = apply_risky_operator(mdp, lo).first;
            const TabularField rhi = apply_risky_operator(mdp, hi).first;
            bool mono = true;
            for (std::size_t s = 0; s < S; ++s) mono = mono && dlo[s] <= dhi[s] && rlo[s] <= rhi[s];
            check("cdf.monotone_operator", mono, [] { return std::string("operator not monotone"); });
        }
        for (std::size_t s = 0; s < S; ++s) {
            if (fstar.cdf[s] > sol.cdf[s] + band && dominance) {
                dominance = false;
                dominance_detail = "F* exceeds F^pi at cell " + std::to_string(s);
            }
        }
    }
    check("cdf.range", range_ok && fstar.cdf.range_ok(), [] { return std::string("value outside [0,1]"); });
    check("cdf.self_consistency", worst_residual <= o.eps_fp,
          [&] { return "residual " + format_real(worst_residual); });
    check("cdf.contraction", contraction_ok && residual_ratios_ok(fstar.residual_history, gamma),
          [] { return std::string("residual ratio above gamma"); });
    check("risky.dominance", dominance, [&] { return dominance_detail; });

    const RegionMask kernel = viability_kernel(mdp);
    const RegionMask risky_region = extract_region(fstar.cdf, o.p);
    check("risky.kernel_agreement", risky_region == kernel,
          [&] { return std::to_string(risky_region.mismatches(kernel)) + " mismatched cells"; });

    std::uint64_t policies = 1;
    for (std::size_t s = 0; s < S && policies <= 100000; ++s) policies *= A;
    if (policies <= 100000) {
        const TabularField exhaustive = enumerate_optimal_cdf(mdp);
        check("risky.enumeration", sup_distance(exhaustive, fstar.cdf) <= band,
              [&] { return "sup distance " + format_real(sup_distance(exhaustive, fstar.cdf)); });
    }

    bool closed = true;
    for (std::size_t s = 0; s < S; ++s) {
        if (!kernel.contains(s)) continue;
        bool any = false;
        for (std::size_t a = 0; a < A; ++a) any = any || kernel.contains(mdp.successor(s, a));
        closed = closed && any;
    }
    check("kernel.closure", closed, [] { return std::string("kernel cell without in-kernel successor"); });

    {
        std::vector<std::uint8_t> flags(mdp.violation_flags().begin(), mdp.violation_flags().end());
        const std::size_t extra = uniform_index(rng, 0, S - 1);
        flags[extra] = 1;
        const FiniteMdp harder(S, A, std::vector<CellIndex>(mdp.successors().begin(), mdp.successors().end()),
                               std::vector<double>(mdp.rewards().begin(), mdp.rewards().end()), std::move(flags),
                               gamma);
        check("kernel.antimonotone", viability_kernel(harder).subset_of(kernel),
              [&] { return "hazard at cell " + std::to_string(extra) + " grew the kernel"; });
    }

    // Feasible policy iteration from a random policy.
    FpiConfig cfg;
    cfg.improvement.threshold = o.p;
    cfg.improvement.tie_tolerance = o.tie_tolerance;
    cfg.cdf = fp;
    cfg.value.tolerance = o.eps_v;
    const TabularPolicy start = random_policy(rng, S, A);

    std::vector<TabularField> cdfs;
    std::vector<TabularField> values;
    std::vector<RegionMask> regions;
    const FpiReport report = run_fpi(mdp, start, cfg, [&](const FpiSnapshot& snap) {
        cdfs.push_back(snap.cdf);
        values.push_back(snap.value);
        regions.push_back(snap.region);
    });

    bool enhancement = true;
    bool expansion = true;
    bool improvement = true;
    for (std::size_t k = 0; k + 1 < cdfs.size(); ++k) {
        for (std::size_t s = 0; s < S; ++s) {
            enhancement = enhancement && cdfs[k + 1][s] <= cdfs[k][s] + 2.0 * band;
            if (regions[k].contains(s)) {
                expansion = expansion && regions[k + 1].contains(s);
                improvement = improvement && values[k + 1][s] >= values[k][s] - 2.0 * o.eps_v / (1.0 - gamma);
            }
        }
    }
    check("fpi.feasibility_enhancement", enhancement, [] { return std::string("CDF increased"); });
    check("fpi.monotone_expansion", expansion, [] { return std::string("region lost a cell"); });
    check("fpi.value_improvement", improvement, [] { return std::string("value decreased on previous region"); });

    const double risky_res = risky_bellman_residual(mdp, report.cdf);
    check("fpi.risky_fixed_point", risky_res <= o.eps_fp, [&] { return "residual " + format_real(risky_res); });
    const double feas_res = feasible_bellman_residual(mdp, report.region, report.value);
    check("fpi.feasible_fixed_point", feas_res <= 1e-9, [&] { return "residual " + format_real(feas_res); });
    check("fpi.kernel_agreement", report.region == kernel,
          [&] { return std::to_string(report.region.mismatches(kernel)) + " mismatched cells"; });

    if (kernel.count() > 0 && report.region == kernel) {
        const ValueSolution vstar = solve_feasible_bellman(mdp, kernel, cfg.value);
        double gap = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            if (kernel.contains(s)) gap = std::max(gap, std::abs(vstar.value[s] - report.value[s]));
        }
        check("fpi.bellman_agreement", gap <= 2.0 * o.eps_v, [&] { return "gap " + format_real(gap); });
    }
    check("fpi.safe_rollouts", unsafe_rollout_starts(mdp, report.policy, report.region, S).empty(),
          [] { return std::string("converged policy reaches a violating cell"); });

    // Barrier mode.
    FpiConfig bcfg = cfg;
    bcfg.improvement.mode = ImprovementMode::Barrier;
    const FpiReport breport = run_fpi(mdp, start, bcfg);
    bool barrier_ok = true;
    for (const auto& r : breport.records) barrier_ok = barrier_ok && r.barrier_infeasible_choices == 0;
    check("barrier.feasibility", barrier_ok, [] { return std::string("barrier chose an infeasible action"); });

    if (!cdfs.empty()) {
        const TabularPolicy exact =
            improve_region_wise(mdp, start, cdfs.front(), values.front(), cfg.improvement);
        const TabularPolicy barrier =
            improve_barrier(mdp, start, cdfs.front(), values.front(), cfg.improvement, 1e6);
        std::size_t members = 0;
        std::size_t agree = 0;
        for (std::size_t s = 0; s < S; ++s) {
            if (!regions.front().contains(s)) continue;
            ++members;
            agree += exact[s] == barrier[s];
        }
        check("barrier.limit", members == 0 || agree >= 0.99 * static_cast<double>(members),
              [&] { return std::to_string(agree) + "/" + std::to_string(members) + " cells agree"; });
    }
    return ok;
}

}  // namespace

bool VerificationSummary::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckTally& t) { return t.failed == 0; });
}

VerificationSummary run_verification(const VerificationOptions& o) {
    Recorder rec;
    VerificationSummary summary;
    RandomMdpOptions ro;
    ro.max_cells = o.max_cells;
    ro.max_actions = o.max_actions;
    ro.gamma = o.gamma;
    for (std::size_t i = 0; i < o.count; ++i) {
        const std::uint64_t mdp_seed = o.seed + i;
        const FiniteMdp mdp = random_mdp(mdp_seed, ro);
        const bool ok = verify_one(mdp, mdp_seed, o, rec);
        ++summary.mdps;
        if (!ok && !summary.failure_artifact && !o.dump_dir.empty()) {
            std::filesystem::create_directories(o.dump_dir);
            const std::string path = (std::filesystem::path(o.dump_dir) /
                                      ("verify_failure_seed_" + std::to_string(mdp_seed) + ".json"))
                                         .string();
            std::ofstream(path) << mdp_to_json(mdp) << '\n';
            summary.failure_artifact = path;
        }
    }
    summary.checks = rec.take();
    return summary;
}

void print_verification_table(std::ostream& out, const VerificationSummary& summary) {
    out << "verified " << summary.mdps << " random MDPs\n";
    for (const CheckTally& t : summary.checks) {
        out << (t.failed == 0 ? "PASS " : "FAIL ") << std::left << std::setw(30) << t.name << std::right
            << std::setw(6) << t.passed << " ok " << std::setw(4) << t.failed << " failed  " << t.property << '\n';
        if (t.failed) out << "     first failure: " << t.first_failure << '\n';
    }
    if (summary.failure_artifact) out << "offending MDP written to " << *summary.failure_artifact << '\n';
    out << (summary.all_passed() ? "ALL CHECKS PASSED" : "CHECKS FAILED") << '\n';
}

}  // namespace fpi
