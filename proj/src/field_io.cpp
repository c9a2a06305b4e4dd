#include "fpi/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fpi {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void write_header(std::ostream& out, const ArtifactHeader& header) {
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << '\n';
}

}  // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

ArtifactHeader grid_header(const GridSpec& grid) {
    ArtifactHeader h;
    std::string dims;
    for (std::size_t d = 0; d < grid.dimensions(); ++d) {
        if (d) dims += ' ';
        dims += std::to_string(grid.axes()[d].cells);
    }
    h.emplace_back("grid.dims", dims);
    for (std::size_t d = 0; d < grid.dimensions(); ++d) {
        const Axis& ax = grid.axes()[d];
        h.emplace_back("grid.axis" + std::to_string(d),
                       format_real(ax.lower) + " " + format_real(ax.upper) + " " + std::to_string(ax.cells));
    }
    h.emplace_back("grid.actions", std::to_string(grid.action_count()));
    return h;
}

void write_field_csv(std::ostream& out, std::span<const double> values, const ArtifactHeader& header) {
    write_header(out, header);
    for (double v : values) out << format_real(v) << '\n';
}

void write_field_csv(const std::string& path, std::span<const double> values, const ArtifactHeader& header) {
    auto out = open_out(path);
    write_field_csv(out, values, header);
}

void write_mask_csv(const std::string& path, const RegionMask& mask, const ArtifactHeader& header) {
    auto out = open_out(path);
    write_header(out, header);
    for (auto m : mask.members) out << (m ? '1' : '0') << '\n';
}

void write_policy_csv(const std::string& path, const TabularPolicy& policy, const ArtifactHeader& header) {
    auto out = open_out(path);
    write_header(out, header);
    for (ActionIndex a : policy.actions) out << a << '\n';
}

std::optional<std::string> FieldFile::find(const std::string& key) const {
    for (const auto& [k, v] : header) {
        if (k == key) return v;
    }
    return std::nullopt;
}

FieldFile read_field_csv(std::istream& in) {
    FieldFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(": ");
            if (colon == std::string::npos || colon < 2) continue;
            file.header.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        try {
            file.values.push_back(parse_real(line));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("field CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return file;
}

FieldFile read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_field_csv(in);
}

std::vector<std::size_t> grid_dims_from_header(const ArtifactHeader& header) {
    for (const auto& [k, v] : header) {
        if (k != "grid.dims") continue;
        std::istringstream ss(v);
        std::vector<std::size_t> dims;
        std::size_t n;
        while (ss >> n) dims.push_back(n);
        if (dims.empty()) break;
        return dims;
    }
    throw std::runtime_error("artifact header has no grid.dims entry");
}

GrayImage layout_image(std::span<const std::size_t> dims, std::span<const std::uint8_t> cell_gray) {
    if (dims.empty() || dims.size() > 3) throw std::invalid_argument("images support 1 to 3 grid dimensions");
    const std::size_t n0 = dims[0];
    const std::size_t n1 = dims.size() > 1 ? dims[1] : 1;
    const std::size_t n2 = dims.size() > 2 ? dims[2] : 1;
    if (cell_gray.size() != n0 * n1 * n2) throw std::invalid_argument("pixel count does not match grid");

    GrayImage img{n0, n1 * n2, std::vector<std::uint8_t>(n0 * n1 * n2)};
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                const std::size_t cell = (i0 * n1 + i1) * n2 + i2;
                const std::size_t row = i2 * n1 + (n1 - 1 - i1);
                img.pixels[row * n0 + i0] = cell_gray[cell];
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> cdf_gray(std::span<const double> cdf) {
    std::vector<std::uint8_t> g(cdf.size());
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        const double v = std::isfinite(cdf[i]) ? std::clamp(cdf[i], 0.0, 1.0) : 1.0;
        g[i] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
    }
    return g;
}

std::vector<std::uint8_t> value_gray(std::span<const double> value) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : value) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::uint8_t> g(value.size(), 0);
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!std::isfinite(value[i])) continue;
        const double t = hi > lo ? (value[i] - lo) / (hi - lo) : 1.0;
        g[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
    return g;
}

std::vector<std::uint8_t> mask_gray(std::span<const std::size_t> dims, const RegionMask& mask, bool mark_boundary) {
    std::size_t total = 1;
    for (std::size_t n : dims) total *= n;
    if (total != mask.size()) throw std::invalid_argument("mask size does not match grid");

    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t d = dims.size(); d-- > 1;) strides[d - 1] = strides[d] * dims[d];

    std::vector<std::uint8_t> g(mask.size(), 0);
    for (std::size_t s = 0; s < mask.size(); ++s) {
        if (!mask.contains(s)) continue;
        g[s] = 255;
        if (!mark_boundary) continue;
        std::size_t rest = s;
        for (std::size_t d = 0; d < dims.size(); ++d) {
            const std::size_t i = rest / strides[d];
            rest %= strides[d];
            const bool lower_out = i > 0 && !mask.contains(s - strides[d]);
            const bool upper_out = i + 1 < dims[d] && !mask.contains(s + strides[d]);
            if (lower_out || upper_out) {
                g[s] = 128;
                break;
            }
        }
    }
    return g;
}

std::vector<std::uint8_t> overlay_gray(const RegionMask& first, const RegionMask& second) {
    if (first.size() != second.size()) throw std::invalid_argument("overlay masks differ in size");
    std::vector<std::uint8_t> g(first.size());
    for (std::size_t s = 0; s < first.size(); ++s) {
        const bool a = first.contains(s);
        const bool b = second.contains(s);
        g[s] = a && b ? 255 : a ? 170 : b ? 85 : 0;
    }
    return g;
}

void write_pgm(std::ostream& out, const GrayImage& image, const ArtifactHeader& header) {
    out << "P2\n";
    write_header(out, header);
    out << image.width << ' ' << image.height << "\n255\n";
    for (std::size_t r = 0; r < image.height; ++r) {
        for (std::size_t c = 0; c < image.width; ++c) {
            if (c) out << ' ';
            out << static_cast<int>(image.pixels[r * image.width + c]);
        }
        out << '\n';
    }
}

void write_pgm(const std::string& path, const GrayImage& image, const ArtifactHeader& header) {
    auto out = open_out(path);
    write_pgm(out, image, header);
}

void write_mdp_csv(std::ostream& out, const FiniteMdp& mdp, const ArtifactHeader& header) {
    write_header(out, header);
    const std::size_t A = mdp.action_count();
    out << "cell,violating";
    for (std::size_t a = 0; a < A; ++a) out << ",succ_" << a;
    for (std::size_t a = 0; a < A; ++a) out << ",reward_" << a;
    out << '\n';
    for (std::size_t s = 0; s < mdp.cell_count(); ++s) {
        out << s << ',' << (mdp.violates(s) ? 1 : 0);
        for (std::size_t a = 0; a < A; ++a) out << ',' << mdp.successor(s, a);
        for (std::size_t a = 0; a < A; ++a) out << ',' << format_real(mdp.reward(s, a));
        out << '\n';
    }
}

std::string mdp_to_json(const FiniteMdp& mdp) {
    nlohmann::json j;
    j["cells"] = mdp.cell_count();
    j["actions"] = mdp.action_count();
    j["gamma"] = mdp.gamma();
    j["successors"] = std::vector<CellIndex>(mdp.successors().begin(), mdp.successors().end());
    j["rewards"] = std::vector<double>(mdp.rewards().begin(), mdp.rewards().end());
    j["violating"] = std::vector<int>(mdp.violation_flags().begin(), mdp.violation_flags().end());
    j["initial_cells"] = std::vector<CellIndex>(mdp.initial_cells().begin(), mdp.initial_cells().end());
    return j.dump(1);
}

FiniteMdp mdp_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<std::uint8_t> violating;
    for (int v : j.at("violating").get<std::vector<int>>()) violating.push_back(v ? 1 : 0);
    return FiniteMdp(j.at("cells").get<std::size_t>(), j.at("actions").get<std::size_t>(),
                     j.at("successors").get<std::vector<CellIndex>>(), j.at("rewards").get<std::vector<double>>(),
                     std::move(violating), j.at("gamma").get<double>(),
                     j.at("initial_cells").get<std::vector<CellIndex>>());
}

}  // namespace fpi
