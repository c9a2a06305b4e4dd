#include "fpi/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace fpi {

namespace {

std::string where(const YAML::Node& node, const std::string& field) {
    const auto mark = node.Mark();
    std::string s = "field '" + field + "'";
    if (mark.line >= 0) s += " (line " + std::to_string(mark.line + 1) + ")";
    return s;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config: " + where(node, field) + " has an invalid value");
    }
}

std::vector<std::size_t> counts(const YAML::Node& node, const std::string& field) {
    std::vector<std::size_t> out;
    if (node.IsScalar()) {
        out.push_back(scalar<std::size_t>(node, field));
    } else if (node.IsSequence()) {
        for (const auto& item : node) out.push_back(scalar<std::size_t>(item, field));
    } else {
        throw ConfigError("config: " + where(node, field) + " must be an integer or a list of integers");
    }
    if (out.empty()) throw ConfigError("config: " + where(node, field) + " is empty");
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

std::string to_string(ImprovementMode mode) {
    return mode == ImprovementMode::Barrier ? "barrier" : "exact";
}

ImprovementMode parse_mode(const std::string& text) {
    if (text == "exact") return ImprovementMode::ExactConstrained;
    if (text == "barrier") return ImprovementMode::Barrier;
    throw ConfigError("config: field 'mode' must be 'exact' or 'barrier', got '" + text + "'");
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (schema_version != kConfigSchemaVersion) {
        fail("unsupported schema_version " + std::to_string(schema_version));
    }
    for (std::size_t n : grid) {
        if (n < 2) fail("field 'grid': resolution must be at least 2 per dimension");
    }
    for (std::size_t n : actions) {
        if (n < 1) fail("field 'actions': action count must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) fail("field 'gamma' must lie strictly inside (0, 1)");
    if (!(p > 0.0 && p < 1.0)) fail("field 'p' must lie strictly inside (0, 1)");
    if (!(eps_fp > 0.0)) fail("field 'eps_fp' must be positive");
    if (!(eps_v > 0.0)) fail("field 'eps_v' must be positive");
    if (!(t0 > 0.0)) fail("field 't0' must be positive");
    if (!(t_factor > 1.0)) fail("field 't_factor' must exceed 1");
    if (t_period < 1) fail("field 't_period' must be at least 1");
    if (!(tie_tolerance >= 0.0)) fail("field 'tie_tolerance' must be non-negative");
    if (initial_action < 0) fail("field 'initial_action' must be non-negative");
    if (verify_max_cells < 1 || verify_max_actions < 1) fail("verify size limits must be positive");
}

FpiConfig RunConfig::solver_config() const {
    FpiConfig cfg;
    cfg.improvement.mode = mode;
    cfg.improvement.threshold = p;
    cfg.improvement.barrier_t0 = t0;
    cfg.improvement.barrier_factor = t_factor;
    cfg.improvement.barrier_period = t_period;
    cfg.improvement.tie_tolerance = tie_tolerance;
    cfg.cdf.tolerance = eps_fp;
    cfg.value.tolerance = eps_v;
    cfg.max_iterations = max_iterations;
    return cfg;
}

ArtifactHeader RunConfig::header() const {
    ArtifactHeader h;
    h.emplace_back("config.schema_version", std::to_string(schema_version));
    h.emplace_back("config.env", env);
    h.emplace_back("config.preset", preset);
    for (const auto& [k, v] : params) h.emplace_back("config.params." + k, format_real(v));
    h.emplace_back("config.grid", join(grid));
    h.emplace_back("config.actions", join(actions));
    h.emplace_back("config.gamma", format_real(gamma));
    h.emplace_back("config.p", format_real(p));
    h.emplace_back("config.eps_fp", format_real(eps_fp));
    h.emplace_back("config.eps_v", format_real(eps_v));
    h.emplace_back("config.mode", to_string(mode));
    h.emplace_back("config.t0", format_real(t0));
    h.emplace_back("config.t_factor", format_real(t_factor));
    h.emplace_back("config.t_period", std::to_string(t_period));
    h.emplace_back("config.tie_tolerance", format_real(tie_tolerance));
    h.emplace_back("config.max_iterations", std::to_string(max_iterations));
    h.emplace_back("config.initial_action", std::to_string(initial_action));
    h.emplace_back("config.horizon", std::to_string(horizon));
    h.emplace_back("config.seed", std::to_string(seed));
    return h;
}

std::string RunConfig::to_yaml() const {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "schema_version" << YAML::Value << schema_version;
    out << YAML::Key << "env" << YAML::Value << env;
    out << YAML::Key << "preset" << YAML::Value << preset;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : params) out << YAML::Key << k << YAML::Value << format_real(v);
    out << YAML::EndMap;
    out << YAML::Key << "grid" << YAML::Value << YAML::Flow << grid;
    out << YAML::Key << "actions" << YAML::Value << YAML::Flow << actions;
    out << YAML::Key << "gamma" << YAML::Value << format_real(gamma);
    out << YAML::Key << "p" << YAML::Value << format_real(p);
    out << YAML::Key << "eps_fp" << YAML::Value << format_real(eps_fp);
    out << YAML::Key << "eps_v" << YAML::Value << format_real(eps_v);
    out << YAML::Key << "mode" << YAML::Value << to_string(mode);
    out << YAML::Key << "t0" << YAML::Value << format_real(t0);
    out << YAML::Key << "t_factor" << YAML::Value << format_real(t_factor);
    out << YAML::Key << "t_period" << YAML::Value << t_period;
    out << YAML::Key << "tie_tolerance" << YAML::Value << format_real(tie_tolerance);
    out << YAML::Key << "max_iterations" << YAML::Value << max_iterations;
    out << YAML::Key << "initial_action" << YAML::Value << initial_action;
    out << YAML::Key << "horizon" << YAML::Value << horizon;
    out << YAML::Key << "output_dir" << YAML::Value << output_dir;
    out << YAML::Key << "seed" << YAML::Value << seed;
    out << YAML::Key << "verify_count" << YAML::Value << verify_count;
    out << YAML::Key << "verify_max_cells" << YAML::Value << verify_max_cells;
    out << YAML::Key << "verify_max_actions" << YAML::Value << verify_max_actions;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

RunConfig parse_run_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("config: parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "schema_version") cfg.schema_version = scalar<int>(v, key);
        else if (key == "env") cfg.env = scalar<std::string>(v, key);
        else if (key == "preset") cfg.preset = scalar<std::string>(v, key);
        else if (key == "params") {
            if (!v.IsMap()) throw ConfigError("config: " + where(v, key) + " must be a mapping");
            for (const auto& p : v) {
                const std::string name = p.first.as<std::string>();
                cfg.params[name] = scalar<double>(p.second, "params." + name);
            }
        }
        else if (key == "grid") cfg.grid = counts(v, key);
        else if (key == "actions") cfg.actions = counts(v, key);
        else if (key == "gamma") cfg.gamma = scalar<double>(v, key);
        else if (key == "p") cfg.p = scalar<double>(v, key);
        else if (key == "eps_fp") cfg.eps_fp = scalar<double>(v, key);
        else if (key == "eps_v") cfg.eps_v = scalar<double>(v, key);
        else if (key == "mode") cfg.mode = parse_mode(scalar<std::string>(v, key));
        else if (key == "t0") cfg.t0 = scalar<double>(v, key);
        else if (key == "t_factor") cfg.t_factor = scalar<double>(v, key);
        else if (key == "t_period") cfg.t_period = scalar<std::size_t>(v, key);
        else if (key == "tie_tolerance") cfg.tie_tolerance = scalar<double>(v, key);
        else if (key == "max_iterations") cfg.max_iterations = scalar<std::size_t>(v, key);
        else if (key == "initial_action") cfg.initial_action = scalar<int>(v, key);
        else if (key == "horizon") cfg.horizon = scalar<std::size_t>(v, key);
        else if (key == "output_dir") cfg.output_dir = scalar<std::string>(v, key);
        else if (key == "seed") cfg.seed = scalar<std::uint64_t>(v, key);
        else if (key == "verify_count") cfg.verify_count = scalar<std::size_t>(v, key);
        else if (key == "verify_max_cells") cfg.verify_max_cells = scalar<std::size_t>(v, key);
        else if (key == "verify_max_actions") cfg.verify_max_actions = scalar<std::size_t>(v, key);
        else throw ConfigError("config: unknown " + where(kv.first, key));
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace fpi
