#include "girsanov/path.hpp"

#include <cmath>
#include <stdexcept>

#include "girsanov/rng.hpp"

namespace girsanov {

SamplePath::SamplePath(GridPtr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
        throw std::invalid_argument("SamplePath: null grid");
    }
    if (static_cast<std::size_t>(values_.cols()) != grid_->node_count()) {
        throw std::invalid_argument("SamplePath: one value column per grid node required");
    }
    if (values_.rows() < 1) {
        throw std::invalid_argument("SamplePath: dimension must be positive");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("SamplePath: values must be finite");
    }
}

BrownianPath::BrownianPath(GridPtr grid, Eigen::MatrixXd increments, std::uint64_t stream_id)
    : grid_(std::move(grid)), increments_(std::move(increments)), stream_id_(stream_id) {
    if (!grid_) {
        throw std::invalid_argument("BrownianPath: null grid");
    }
    if (static_cast<std::size_t>(increments_.cols()) != grid_->step_count()) {
        throw std::invalid_argument("BrownianPath: one increment column per grid step required");
    }
    if (increments_.rows() < 1) {
        throw std::invalid_argument("BrownianPath: dimension must be positive");
    }
    if (!increments_.allFinite()) {
        throw std::invalid_argument("BrownianPath: increments must be finite");
    }
}

Eigen::VectorXd BrownianPath::cumulative(std::size_t node) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(increments_.rows());
    for (std::size_t i = 0; i < node; ++i) {
        w += increments_.col(i);
    }
    return w;
}

BrownianPath sample_brownian(GridPtr grid, int m, std::uint64_t master_seed,
                             std::uint64_t stream_id) {
    if (!grid) {
        throw std::invalid_argument("sample_brownian: null grid");
    }
    if (m < 1) {
        throw std::invalid_argument("sample_brownian: m must be positive");
    }
    const std::size_t steps = grid->step_count();
    Eigen::MatrixXd inc(m, steps);
    CounterRng rng(master_seed, stream_id);
    for (std::size_t i = 0; i < steps; ++i) {
        const double scale = std::sqrt(grid->dt(i));
        for (int k = 0; k < m; ++k) {
            inc(k, i) = scale * rng.next_normal();
        }
    }
    return BrownianPath(std::move(grid), std::move(inc), stream_id);
}

}  // namespace girsanov
