#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace girsanov {

/// Strictly increasing time mesh on a finite interval. Immutable.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t step_count() const noexcept { return nodes_.size() - 1; }
    double node(std::size_t i) const { return nodes_[i]; }
    double dt(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    double t0() const noexcept { return nodes_.front(); }
    double horizon() const noexcept { return nodes_.back(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    /// Index of the node matching t; throws std::invalid_argument if t is
    /// not a grid node (1e-12 absolute-or-relative slack).
    std::size_t index_of(double t) const;

    bool operator==(const TimeGrid& other) const noexcept { return nodes_ == other.nodes_; }

private:
    std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

/// n_steps + 1 equally spaced nodes from t0 to T.
TimeGrid make_uniform_grid(double t0, double T, std::size_t n_steps);

inline GridPtr share(TimeGrid grid) { return std::make_shared<const TimeGrid>(std::move(grid)); }

/// Same mesh: identical object or node-wise equal.
bool same_mesh(const TimeGrid& a, const TimeGrid& b);

}  // namespace girsanov
