#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpi/grid.hpp"
#include "fpi/mdp.hpp"

namespace fpi {

/// Ordered key/value lines embedded in every artifact: `# key: value` in
/// CSV files, comment lines in PGM images.
using ArtifactHeader = std::vector<std::pair<std::string, std::string>>;

/// Grid geometry as header entries (grid.dims, grid.axisN, grid.actions).
ArtifactHeader grid_header(const GridSpec& grid);

/// Shortest decimal text that round-trips the double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_real(double v);
double parse_real(const std::string& text);

// ---------------------------------------------------------------------------
// Field CSV: header lines prefixed `#`, then one value per line in flat
// cell-major order.
// ---------------------------------------------------------------------------
void write_field_csv(std::ostream& out, std::span<const double> values, const ArtifactHeader& header);
void write_field_csv(const std::string& path, std::span<const double> values, const ArtifactHeader& header);
void write_mask_csv(const std::string& path, const RegionMask& mask, const ArtifactHeader& header);
void write_policy_csv(const std::string& path, const TabularPolicy& policy, const ArtifactHeader& header);

struct FieldFile {
    ArtifactHeader header;
    std::vector<double> values;

    std::optional<std::string> find(const std::string& key) const;
};

FieldFile read_field_csv(std::istream& in);
FieldFile read_field_csv(const std::string& path);

/// Rebuilds the state axes recorded by grid_header (actions are not
/// stored). Returns per-dimension cell counts.
std::vector<std::size_t> grid_dims_from_header(const ArtifactHeader& header);

// ---------------------------------------------------------------------------
// PGM (P2, ASCII, maxval 255).
//
// Image layout for grid fields: column = index along dimension 0, row 0 is
// the highest index along dimension 1. A 1-D grid is a single row; for a
// 3-D grid the dimension-2 slices are stacked top to bottom.
//
// Gray mappings:
//   CDF    gray = round(255 * (1 - F)), so F = 0 is white and F = 1 black.
//   value  linear between the finite minimum (black) and maximum (white);
//          non-finite cells are black.
//   mask   member 255, non-member 0; with boundary marking, members that
//          have a non-member grid neighbour are 128.
//   overlay  both 255, first only 170, second only 85, neither 0.
// ---------------------------------------------------------------------------
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  ///< row-major, top row first
};

GrayImage layout_image(std::span<const std::size_t> dims, std::span<const std::uint8_t> cell_gray);

std::vector<std::uint8_t> cdf_gray(std::span<const double> cdf);
std::vector<std::uint8_t> value_gray(std::span<const double> value);
std::vector<std::uint8_t> mask_gray(std::span<const std::size_t> dims, const RegionMask& mask, bool mark_boundary);
std::vector<std::uint8_t> overlay_gray(const RegionMask& first, const RegionMask& second);

void write_pgm(std::ostream& out, const GrayImage& image, const ArtifactHeader& header);
void write_pgm(const std::string& path, const GrayImage& image, const ArtifactHeader& header);

// ---------------------------------------------------------------------------
// FiniteMdp dumps.
// ---------------------------------------------------------------------------

/// Row per cell: cell, violating, succ_0..succ_{A-1}, reward_0..reward_{A-1}.
void write_mdp_csv(std::ostream& out, const FiniteMdp& mdp, const ArtifactHeader& header);

/// Self-contained JSON dump that read_mdp_json restores exactly (grid
/// geometry is not included).
std::string mdp_to_json(const FiniteMdp& mdp);
FiniteMdp mdp_from_json(const std::string& text);

}  // namespace fpi
