#include "fpi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace fpi {

GridSpec::GridSpec(std::vector<Axis> axes, std::vector<Vec> actions)
    : axes_(std::move(axes)), actions_(std::move(actions)) {
    if (axes_.empty()) {
        throw std::invalid_argument("grid needs at least one dimension");
    }
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const Axis& ax = axes_[d];
        if (!std::isfinite(ax.lower) || !std::isfinite(ax.upper) || !(ax.lower < ax.upper)) {
            throw std::invalid_argument("grid axis " + std::to_string(d) +
                                        ": lower bound must be below upper bound");
        }
        if (ax.cells < 2) {
            throw std::invalid_argument("grid axis " + std::to_string(d) +
                                        ": cell count must be at least 2");
        }
    }
    if (actions_.empty()) {
        throw std::invalid_argument("action list is empty");
    }
    const std::size_t adim = actions_.front().size();
    std::set<Vec> seen;
    for (const Vec& a : actions_) {
        if (a.size() != adim) {
            throw std::invalid_argument("action vectors have inconsistent dimension");
        }
        if (!seen.insert(a).second) {
            throw std::invalid_argument("action list contains duplicates");
        }
    }

    strides_.assign(axes_.size(), 1);
    cell_count_ = 1;
    for (std::size_t d = axes_.size(); d-- > 0;) {
        strides_[d] = cell_count_;
        cell_count_ *= axes_[d].cells;
    }
}

double GridSpec::spacing(std::size_t dim) const {
    const Axis& ax = axes_[dim];
    return (ax.upper - ax.lower) / static_cast<double>(ax.cells - 1);
}

std::vector<std::size_t> GridSpec::unflatten(std::size_t cell) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        idx[d] = cell / strides_[d];
        cell %= strides_[d];
    }
    return idx;
}

std::size_t GridSpec::flatten(std::span<const std::size_t> index) const {
    std::size_t cell = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        cell += index[d] * strides_[d];
    }
    return cell;
}

Vec GridSpec::center(std::size_t cell) const {
    Vec x(axes_.size());
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const std::size_t i = cell / strides_[d];
        cell %= strides_[d];
        const Axis& ax = axes_[d];
        // pin the last center to `upper` exactly
        x[d] = (i + 1 == ax.cells) ? ax.upper : ax.lower + static_cast<double>(i) * spacing(d);
    }
    return x;
}

std::size_t GridSpec::nearest_cell(std::span<const double> point) const {
    std::size_t cell = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const Axis& ax = axes_[d];
        const double x = std::clamp(point[d], ax.lower, ax.upper);
        const double t = (x - ax.lower) / spacing(d);
        // ceil(t - 1/2) rounds half-way points down
        auto i = static_cast<std::ptrdiff_t>(std::ceil(t - 0.5));
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(ax.cells) - 1);
        cell += static_cast<std::size_t>(i) * strides_[d];
    }
    return cell;
}

std::vector<Vec> make_action_grid(std::span<const double> lower,
                                  std::span<const double> upper,
                                  std::span<const std::size_t> counts) {
    if (lower.size() != upper.size() || lower.size() != counts.size() || lower.empty()) {
        throw std::invalid_argument("action grid: bounds and counts must have equal, non-zero length");
    }
    std::vector<Vec> samples(lower.size());
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (counts[d] == 0) {
            throw std::invalid_argument("action grid: count must be positive");
        }
        if (counts[d] == 1) {
            samples[d].push_back(0.5 * (lower[d] + upper[d]));
            continue;
        }
        if (!(lower[d] < upper[d])) {
            throw std::invalid_argument("action grid: lower bound must be below upper bound");
        }
        const double h = (upper[d] - lower[d]) / static_cast<double>(counts[d] - 1);
        for (std::size_t i = 0; i < counts[d]; ++i) {
            samples[d].push_back(i + 1 == counts[d] ? upper[d] : lower[d] + static_cast<double>(i) * h);
        }
    }

    std::vector<Vec> actions{Vec{}};
    for (const Vec& axis : samples) {
        std::vector<Vec> next;
        next.reserve(actions.size() * axis.size());
        for (const Vec& prefix : actions) {
            for (double v : axis) {
                Vec a = prefix;
                a.push_back(v);
                next.push_back(std::move(a));
            }
        }
        actions = std::move(next);
    }
    return actions;
}

}  // namespace fpi
