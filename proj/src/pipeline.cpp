#include "fpi/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <regex>

#include "fpi/feasibility.hpp"
#include "fpi/oracle.hpp"
#include "fpi/planning.hpp"
#include "fpi/verification.hpp"
#include "json.hpp"

namespace fpi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iteration_tag(std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", k);
    return buf;
}

ArtifactHeader with(ArtifactHeader h, std::initializer_list<std::pair<std::string, std::string>> extra) {
    h.insert(h.begin(), extra.begin(), extra.end());
    return h;
}

json header_json(const ArtifactHeader& h) {
    json j = json::object();
    for (const auto& [k, v] : h) j[k] = v;
    return j;
}

json record_json(const FpiIterationRecord& r) {
    return json{{"iteration", r.iteration},
                {"feasible_cells", r.feasible_cells},
                {"band_cells", r.band_cells},
                {"policy_changes", r.policy_changes},
                {"barrier_t", r.barrier_t},
                {"delta_f_sup", r.delta_f_sup},
                {"max_delta_f", r.max_delta_f},
                {"min_delta_v_region", r.min_delta_v_region},
                {"region_lost_cells", r.region_lost_cells},
                {"barrier_infeasible_choices", r.barrier_infeasible_choices},
                {"value_min", r.value_min},
                {"value_max", r.value_max},
                {"value_mean", r.value_mean},
                {"cdf_sweeps", r.cdf_sweeps},
                {"value_sweeps", r.value_sweeps},
                {"converged", r.converged}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
}

std::vector<std::size_t> list_indices(const std::vector<std::size_t>& v, std::size_t limit) {
    return std::vector<std::size_t>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(limit, v.size())));
}

}  // namespace

Problem build_problem(const RunConfig& cfg) {
    if (cfg.env.empty()) throw ConfigError("config: field 'env' is required");
    EnvironmentSpec env = make_environment(cfg.env, cfg.params, cfg.preset);
    GridSpec grid = cfg.env == "gridworld" ? gridworld_grid(env) : make_grid(env, cfg.grid, cfg.actions);
    FiniteMdp mdp = discretize(env, grid, cfg.gamma);
    return Problem{std::move(env), std::move(grid), std::move(mdp)};
}

ArtifactHeader artifact_header(const RunConfig& cfg, const Problem& problem) {
    ArtifactHeader h = cfg.header();
    for (const auto& [k, v] : problem.env.params) h.emplace_back("env." + k, format_real(v));
    for (auto& entry : grid_header(problem.grid)) h.push_back(std::move(entry));
    return h;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::optional<Problem> problem;
    try {
        cfg.validate();
        problem.emplace(build_problem(cfg));
    } catch (const std::exception& e) {
        err << "solve: " << e.what() << '\n';
        return kExitUsage;
    }
    const FiniteMdp& mdp = problem->mdp;
    if (static_cast<std::size_t>(cfg.initial_action) >= mdp.action_count()) {
        err << "solve: initial_action " << cfg.initial_action << " out of range (" << mdp.action_count()
            << " actions)\n";
        return kExitUsage;
    }

    const fs::path dir(cfg.output_dir);
    const fs::path fields = dir / "fields";
    fs::create_directories(fields);
    write_text(dir / "config.yaml", cfg.to_yaml());
    const ArtifactHeader header = artifact_header(cfg, *problem);

    auto dump = [&](const std::string& tag, const TabularField& f, const TabularField& v, const RegionMask& r,
                    const std::string& iteration) {
        write_field_csv((fields / ("F_" + tag + ".csv")).string(), f.values,
                        with(header, {{"field", "cdf"}, {"iteration", iteration}}));
        write_field_csv((fields / ("V_" + tag + ".csv")).string(), v.values,
                        with(header, {{"field", "value"}, {"iteration", iteration}}));
        write_mask_csv((fields / ("region_" + tag + ".csv")).string(), r,
                       with(header, {{"field", "region"}, {"iteration", iteration}}));
    };

    const FpiConfig solver = cfg.solver_config();
    FpiReport report;
    bool capped = false;
    try {
        report = run_fpi(mdp, TabularPolicy::constant(mdp.cell_count(), cfg.initial_action), solver,
                         [&](const FpiSnapshot& s) {
                             const std::string tag = iteration_tag(s.iteration);
                             dump(tag, s.cdf, s.value, s.region, std::to_string(s.iteration));
                         });
    } catch (const FpiIterationCapError& e) {
        err << "solve: " << e.what() << '\n';
        report = e.report();
        capped = true;
    } catch (const std::exception& e) {
        err << "solve: solver failure: " << e.what() << '\n';
        return kExitCheckFailed;
    }

    dump("final", report.cdf, report.value, report.region, "final");
    write_policy_csv((dir / "policy.csv").string(), report.policy, with(header, {{"field", "policy"}}));

    const RegionMask kernel = viability_kernel(mdp);
    write_mask_csv((fields / "kernel.csv").string(), kernel, with(header, {{"field", "kernel"}}));
    std::vector<std::size_t> mismatched;
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        if (kernel.contains(s) != report.region.contains(s)) mismatched.push_back(s);
    }
    const auto unsafe = unsafe_rollout_starts(mdp, report.policy, report.region, cfg.horizon);
    const auto steps = steps_to_violation(mdp, report.policy);
    std::size_t eventually_violating = 0;
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        eventually_violating += report.region.contains(s) && steps[s] != kNeverViolates;
    }

    json j;
    j["format"] = "fpi-report";
    j["version"] = 1;
    j["config"] = header_json(header);
    j["mdp"] = {{"cells", mdp.cell_count()},
                {"actions", mdp.action_count()},
                {"gamma", mdp.gamma()},
                {"violating_cells", mdp.cell_count() - constraint_indicator(mdp).count()},
                {"initial_cells", mdp.initial_cells().size()}};
    json records = json::array();
    for (const auto& r : report.records) records.push_back(record_json(r));
    j["iterations"] = std::move(records);
    j["converged"] = report.converged;
    j["iteration_count"] = report.iterations;
    j["final"] = {{"feasible_cells", report.region.count()}};
    j["kernel"] = {{"cells", kernel.count()},
                   {"mismatched_cells", mismatched.size()},
                   {"agreement", 1.0 - static_cast<double>(mismatched.size()) / static_cast<double>(mdp.cell_count())},
                   {"mismatch_sample", list_indices(mismatched, 100)}};
    j["rollout_audit"] = {{"horizon", cfg.horizon},
                          {"starts", report.region.count()},
                          {"violating_starts", unsafe.size()},
                          {"violating_sample", list_indices(unsafe, 100)},
                          {"eventually_violating_starts", eventually_violating}};
    if (auto cbf = make_cbf(problem->env)) {
        const RegionMask safe = cbf_safe_set(*cbf, mdp);
        std::size_t outside = 0;
        for (std::size_t s = 0; s < safe.size(); ++s) outside += safe.contains(s) && !report.region.contains(s);
        j["cbf"] = {{"name", cbf->name}, {"decay", cbf->decay}, {"cells", safe.count()}, {"outside_region", outside}};
    }
    write_text(dir / "report.json", j.dump(2) + "\n");

    out << "env " << cfg.env << ": " << mdp.cell_count() << " cells, " << mdp.action_count() << " actions\n";
    out << "iterations " << report.iterations << (report.converged ? " (converged)" : " (NOT converged)") << '\n';
    out << "region sizes:";
    for (const auto& r : report.records) out << ' ' << r.feasible_cells;
    out << '\n';
    out << "feasible cells " << report.region.count() << ", kernel cells " << kernel.count() << ", mismatched "
        << mismatched.size() << '\n';
    out << "rollout audit (" << cfg.horizon << " steps): " << unsafe.size() << " violating starts\n";
    out << "report written to " << (dir / "report.json").string() << '\n';

    if (capped || !report.converged) return kExitCheckFailed;
    return unsafe.empty() ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const RunConfig& cfg, bool corrupt_cdf, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        err << "verify: " << e.what() << '\n';
        return kExitUsage;
    }
    VerificationOptions o;
    o.seed = cfg.seed;
    o.count = cfg.verify_count;
    o.max_cells = cfg.verify_max_cells;
    o.max_actions = cfg.verify_max_actions;
    o.gamma = cfg.gamma;
    o.p = cfg.p;
    o.eps_fp = cfg.eps_fp;
    o.eps_v = cfg.eps_v;
    o.tie_tolerance = cfg.tie_tolerance;
    o.corrupt_cdf = corrupt_cdf;
    o.dump_dir = cfg.output_dir;
    try {
        const VerificationSummary summary = run_verification(o);
        print_verification_table(out, summary);
        return summary.all_passed() ? kExitOk : kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "verify: solver failure: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::optional<Problem> problem;
    try {
        cfg.validate();
        problem.emplace(build_problem(cfg));
    } catch (const std::exception& e) {
        err << "oracle: " << e.what() << '\n';
        return kExitUsage;
    }
    const FiniteMdp& mdp = problem->mdp;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const ArtifactHeader header = artifact_header(cfg, *problem);
    const auto dims = grid_dims_from_header(header);

    const RegionMask kernel = viability_kernel(mdp);
    FixedPointConfig fp;
    fp.tolerance = cfg.eps_fp;
    CdfSolution fstar;
    try {
        fstar = solve_risky_bellman(mdp, fp);
    } catch (const std::exception& e) {
        err << "oracle: solver failure: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    const RegionMask region = extract_region(fstar.cdf, cfg.p);

    write_mask_csv((dir / "kernel.csv").string(), kernel, with(header, {{"field", "kernel"}}));
    write_pgm((dir / "kernel.pgm").string(), layout_image(dims, mask_gray(dims, kernel, true)),
              with(header, {{"field", "kernel"}}));
    write_field_csv((dir / "F_star.csv").string(), fstar.cdf.values, with(header, {{"field", "cdf"}}));
    write_pgm((dir / "F_star.pgm").string(), layout_image(dims, cdf_gray(fstar.cdf.values)),
              with(header, {{"field", "cdf"}}));

    const std::size_t mismatches = region.mismatches(kernel);
    out << "kernel cells " << kernel.count() << " of " << mdp.cell_count() << "\n";
    out << "risky Bellman region cells " << region.count() << " (" << fstar.sweeps << " sweeps), mismatched "
        << mismatches << '\n';
    return mismatches == 0 ? kExitOk : kExitCheckFailed;
}

int cmd_export(const std::string& run_dir, bool cbf_overlay, std::ostream& out, std::ostream& err) {
    const fs::path dir(run_dir);
    const fs::path config_path = dir / "config.yaml";
    const fs::path fields = dir / "fields";
    if (!fs::is_directory(dir) || !fs::exists(config_path) || !fs::is_directory(fields)) {
        err << "export: '" << run_dir << "' is not a completed run directory\n";
        return kExitUsage;
    }

    std::vector<std::string> tags;
    const std::regex pattern(R"(F_(\d{4})\.csv)");
    for (const auto& entry : fs::directory_iterator(fields)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) tags.push_back(m[1]);
    }
    std::sort(tags.begin(), tags.end());
    if (tags.empty()) {
        err << "export: no per-iteration fields in '" << fields.string() << "'\n";
        return kExitUsage;
    }

    const fs::path images = dir / "images";
    fs::create_directories(images);
    std::vector<std::size_t> counts;
    RegionMask last_region;
    try {
        for (const std::string& tag : tags) {
            const FieldFile f = read_field_csv((fields / ("F_" + tag + ".csv")).string());
            const FieldFile v = read_field_csv((fields / ("V_" + tag + ".csv")).string());
            const FieldFile r = read_field_csv((fields / ("region_" + tag + ".csv")).string());
            const auto dims = grid_dims_from_header(f.header);
            RegionMask region = RegionMask::empty(r.values.size());
            for (std::size_t s = 0; s < r.values.size(); ++s) region.members[s] = r.values[s] != 0.0;
            write_pgm((images / ("F_" + tag + ".pgm")).string(), layout_image(dims, cdf_gray(f.values)), f.header);
            write_pgm((images / ("V_" + tag + ".pgm")).string(), layout_image(dims, value_gray(v.values)), v.header);
            write_pgm((images / ("region_" + tag + ".pgm")).string(),
                      layout_image(dims, mask_gray(dims, region, true)), r.header);
            counts.push_back(region.count());
            last_region = std::move(region);
        }
    } catch (const std::exception& e) {
        err << "export: " << e.what() << '\n';
        return kExitUsage;
    }

    bool nondecreasing = true;
    out << "region sizes:";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << ' ' << counts[i];
        if (i && counts[i] < counts[i - 1]) nondecreasing = false;
    }
    out << (nondecreasing ? "  (nondecreasing)" : "  (DECREASING)") << '\n';
    out << "wrote " << 3 * tags.size() << " images to " << images.string() << '\n';

    if (fs::exists(fields / "kernel.csv")) {
        const FieldFile k = read_field_csv((fields / "kernel.csv").string());
        RegionMask kernel = RegionMask::empty(k.values.size());
        for (std::size_t s = 0; s < k.values.size(); ++s) kernel.members[s] = k.values[s] != 0.0;
        const auto dims = grid_dims_from_header(k.header);
        write_pgm((images / "region_vs_kernel.pgm").string(), layout_image(dims, overlay_gray(last_region, kernel)),
                  with(k.header, {{"overlay", "first=learned region, second=kernel"}}));
        out << "learned region vs kernel: " << last_region.mismatches(kernel) << " mismatched cells\n";
    }

    if (!cbf_overlay) return nondecreasing ? kExitOk : kExitCheckFailed;

    try {
        const RunConfig cfg = load_run_config(config_path.string());
        const Problem problem = build_problem(cfg);
        const auto cbf = make_cbf(problem.env);
        if (!cbf) {
            err << "export: environment '" << cfg.env << "' has no barrier function\n";
            return kExitUsage;
        }
        const RegionMask safe = cbf_safe_set(*cbf, problem.mdp);
        std::size_t outside = 0;
        for (std::size_t s = 0; s < safe.size(); ++s) outside += safe.contains(s) && !last_region.contains(s);
        const ArtifactHeader header = artifact_header(cfg, problem);
        const auto dims = grid_dims_from_header(header);
        write_pgm((images / "cbf_region.pgm").string(), layout_image(dims, mask_gray(dims, safe, true)),
                  with(header, {{"field", "cbf safe set"}}));
        write_pgm((images / "cbf_overlay.pgm").string(), layout_image(dims, overlay_gray(last_region, safe)),
                  with(header, {{"overlay", "first=learned region, second=cbf safe set"}}));
        out << "cbf cells " << safe.count() << ", learned region cells " << last_region.count()
            << ", cbf cells outside learned region " << outside << '\n';
    } catch (const std::exception& e) {
        err << "export: " << e.what() << '\n';
        return kExitUsage;
    }
    return nondecreasing ? kExitOk : kExitCheckFailed;
}

}  // namespace fpi
