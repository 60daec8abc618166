#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "girsanov/time_grid.hpp"

namespace girsanov {

/// A d-dimensional path sampled on a grid, one column per node. Immutable.
class SamplePath {
public:
    SamplePath(GridPtr grid, Eigen::MatrixXd values);

    int dimension() const noexcept { return static_cast<int>(values_.rows()); }
    const TimeGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::MatrixXd::ConstColXpr at(std::size_t node) const { return values_.col(node); }
    double scalar_at(std::size_t node) const { return values_(0, node); }
    Eigen::MatrixXd::ConstColXpr terminal() const { return values_.col(values_.cols() - 1); }

private:
    GridPtr grid_;
    Eigen::MatrixXd values_;
};

/// Non-owning handle on a path prefix: the grid, the value matrix and the
/// current node. Coefficient functionals receive one of these; they are
/// expected to read values only at nodes <= node() (checked by probing, see
/// check_nonanticipative, not prevented mechanically).
class PathView {
public:
    PathView(const TimeGrid& grid, const Eigen::MatrixXd& values, std::size_t node) noexcept
        : grid_(&grid), values_(&values), node_(node) {}
    PathView(const SamplePath& path, std::size_t node) noexcept
        : grid_(&path.grid()), values_(&path.values()), node_(node) {}

    std::size_t node() const noexcept { return node_; }
    double time() const { return grid_->node(node_); }
    double time_at(std::size_t j) const { return grid_->node(j); }
    const TimeGrid& grid() const noexcept { return *grid_; }
    int dimension() const noexcept { return static_cast<int>(values_->rows()); }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(values_->cols()); }

    Eigen::MatrixXd::ConstColXpr value(std::size_t j) const { return values_->col(j); }
    Eigen::MatrixXd::ConstColXpr current() const { return values_->col(node_); }
    double scalar(std::size_t j) const { return (*values_)(0, j); }

private:
    const TimeGrid* grid_;
    const Eigen::MatrixXd* values_;
    std::size_t node_;
};

/// m-dimensional Wiener increments on a grid, one column per step.
/// Seed-deterministic: regenerating with the same (master_seed, stream_id)
/// is bit-identical.
class BrownianPath {
public:
    BrownianPath(GridPtr grid, Eigen::MatrixXd increments, std::uint64_t stream_id);

    int dimension() const noexcept { return static_cast<int>(increments_.rows()); }
    const TimeGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Eigen::MatrixXd& increments() const noexcept { return increments_; }
    Eigen::MatrixXd::ConstColXpr increment(std::size_t step) const { return increments_.col(step); }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Cumulative value W(t_k) - W(t_0).
    Eigen::VectorXd cumulative(std::size_t node) const;

private:
    GridPtr grid_;
    Eigen::MatrixXd increments_;
    std::uint64_t stream_id_;
};

/// Gaussian increments with covariance dt_i * I(m), drawn step-major and
/// component-minor from the (master_seed, stream_id) counter stream.
BrownianPath sample_brownian(GridPtr grid, int m, std::uint64_t master_seed,
                             std::uint64_t stream_id);

}  // namespace girsanov
