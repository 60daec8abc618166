#include "girsanov/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace girsanov {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) {
        throw std::invalid_argument("TimeGrid needs at least 2 nodes");
    }
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i + 1] > nodes_[i])) {
            throw std::invalid_argument("TimeGrid nodes must be strictly increasing");
        }
        if (!std::isfinite(nodes_[i])) {
            throw std::invalid_argument("TimeGrid nodes must be finite");
        }
    }
    if (!std::isfinite(nodes_.back())) {
        throw std::invalid_argument("TimeGrid nodes must be finite");
    }
}

std::size_t TimeGrid::index_of(double t) const {
    const double scale = std::max({1.0, std::abs(t0()), std::abs(horizon())});
    std::size_t best = 0;
    double best_dist = std::abs(nodes_[0] - t);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double d = std::abs(nodes_[i] - t);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    if (best_dist > 1e-12 * scale) {
        throw std::invalid_argument("time " + std::to_string(t) + " is not a grid node");
    }
    return best;
}

TimeGrid make_uniform_grid(double t0, double T, std::size_t n_steps) {
    if (!(T > t0)) {
        throw std::invalid_argument("make_uniform_grid: T must exceed t0");
    }
    if (n_steps < 1) {
        throw std::invalid_argument("make_uniform_grid: n_steps must be positive");
    }
    std::vector<double> nodes(n_steps + 1);
    const double dt = (T - t0) / static_cast<double>(n_steps);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        nodes[i] = t0 + static_cast<double>(i) * dt;
    }
    nodes.back() = T;  // avoid drift in the last node
    return TimeGrid(std::move(nodes));
}

bool same_mesh(const TimeGrid& a, const TimeGrid& b) {
    return &a == &b || a == b;
}

}  // namespace girsanov
