#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpi {

using Vec = std::vector<double>;

/// One axis of a uniform grid. `lower` and `upper` are the outermost cell
/// centers, so centers sit at lower + i * (upper - lower) / (cells - 1).
struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t cells = 2;

    bool operator==(const Axis&) const = default;
};

/// Uniform tensor-product grid over the state box plus an explicit list of
/// action vectors.
///
/// Flat cell indices are row-major with dimension 0 slowest.
class GridSpec {
public:
    GridSpec(std::vector<Axis> axes, std::vector<Vec> actions);

    std::size_t dimensions() const { return axes_.size(); }
    std::size_t cell_count() const { return cell_count_; }
    std::size_t action_count() const { return actions_.size(); }
    std::size_t action_dimensions() const { return actions_.front().size(); }

    const std::vector<Axis>& axes() const { return axes_; }
    const std::vector<Vec>& actions() const { return actions_; }
    const Vec& action(std::size_t a) const { return actions_[a]; }

    double spacing(std::size_t dim) const;

    Vec center(std::size_t cell) const;
    std::vector<std::size_t> unflatten(std::size_t cell) const;
    std::size_t flatten(std::span<const std::size_t> index) const;

    /// Nearest cell center (Euclidean) after clamping `point` into the
    /// bounding box. Exact half-way ties resolve to the lower index, which
    /// on a uniform grid is also the lowest flat index.
    std::size_t nearest_cell(std::span<const double> point) const;

    bool operator==(const GridSpec&) const = default;

private:
    std::vector<Axis> axes_;
    std::vector<Vec> actions_;
    std::vector<std::size_t> strides_;
    std::size_t cell_count_ = 0;
};

/// Cartesian product of per-dimension uniform action samples, dimension 0
/// slowest. A count of 1 places the single sample at the midpoint.
std::vector<Vec> make_action_grid(std::span<const double> lower,
                                  std::span<const double> upper,
                                  std::span<const std::size_t> counts);

}  // namespace fpi
