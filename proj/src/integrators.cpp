#include "girsanov/integrators.hpp"

#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "girsanov/errors.hpp"

namespace girsanov {

SamplePath euler_maruyama(const CoefficientModel& model, DriftSelector which,
                          const Eigen::VectorXd& x0, const BrownianPath& w) {
    const int d = model.dimension();
    const int m = model.noise_dimension();
    if (x0.size() != d) {
        throw std::invalid_argument("euler_maruyama: x0 dimension mismatch");
    }
    if (w.dimension() != m) {
        throw std::invalid_argument("euler_maruyama: noise dimension mismatch");
    }
    const TimeGrid& grid = w.grid();
    const std::size_t steps = grid.step_count();

    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(steps) + 1);
    values.col(0) = x0;
    Eigen::VectorXd drift(d);
    Eigen::MatrixXd sigma(d, m);
    for (std::size_t i = 0; i < steps; ++i) {
        const PathView prefix(grid, values, i);
        const double t = grid.node(i);
        model.drift(which, t, prefix, drift);
        if (!drift.allFinite()) {
            throw NumericError("euler_maruyama: non-finite drift", i);
        }
        model.diffusion(t, prefix, sigma);
        if (!sigma.allFinite()) {
            throw NumericError("euler_maruyama: non-finite diffusion", i);
        }
        values.col(i + 1) = values.col(i) + drift * grid.dt(i) + sigma * w.increment(i);
        if (!values.col(i + 1).allFinite()) {
            throw NumericError("euler_maruyama: non-finite state", i + 1);
        }
    }
    return SamplePath(w.grid_ptr(), std::move(values));
}

SamplePath exact_linear_solution(const MatrixOfTime& c, const MatrixOfTime& sigma, double s,
                                 const Eigen::VectorXd& y, const BrownianPath& w) {
    const TimeGrid& grid = w.grid();
    const std::size_t start = grid.index_of(s);
    const std::size_t steps = grid.step_count();
    const int d = static_cast<int>(y.size());

    std::vector<double> tail_nodes(grid.nodes().begin() + static_cast<std::ptrdiff_t>(start),
                                   grid.nodes().end());
    GridPtr tail_grid = share(TimeGrid(std::move(tail_nodes)));

    Eigen::MatrixXd values(d, static_cast<Eigen::Index>(steps - start) + 1);
    values.col(0) = y;
    const bool scalar = (d == 1);
    for (std::size_t i = start; i < steps; ++i) {
        const double t = grid.node(i);
        const double dt = grid.dt(i);
        const Eigen::MatrixXd ct = c(t);
        const Eigen::MatrixXd st = sigma(t);
        if (ct.rows() != d || ct.cols() != d) {
            throw std::invalid_argument("exact_linear_solution: c(t) must be d x d");
        }
        if (st.rows() != d || st.cols() != w.dimension()) {
            throw std::invalid_argument("exact_linear_solution: sigma(t) must be d x m");
        }
        const Eigen::Index j = static_cast<Eigen::Index>(i - start);
        if (scalar) {
            values(0, j + 1) = std::exp(ct(0, 0) * dt) * values(0, j) +
                               (st.row(0) * w.increment(i)).value();
        } else {
            const Eigen::MatrixXd propagator = (ct * dt).exp();
            values.col(j + 1) = propagator * values.col(j) + st * w.increment(i);
        }
    }
    return SamplePath(std::move(tail_grid), std::move(values));
}

}  // namespace girsanov
