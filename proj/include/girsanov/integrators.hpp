#pragma once

#include <Eigen/Dense>
#include <functional>

#include "girsanov/coefficients.hpp"
#include "girsanov/path.hpp"

namespace girsanov {

/// Euler-Maruyama on the grid of w:
///   X_{i+1} = X_i + drift(t_i, prefix) dt_i + sigma(t_i, prefix) dW_i.
/// Deterministic function of (model, x0, increments). Throws NumericError
/// with the node index when a coefficient returns a non-finite value.
SamplePath euler_maruyama(const CoefficientModel& model, DriftSelector which,
                          const Eigen::VectorXd& x0, const BrownianPath& w);

using MatrixOfTime = std::function<Eigen::MatrixXd(double)>;

/// Solution map of the linear equation dX = c(t) X dt + sigma(t) dW started
/// at time s (a grid node) from y, realized on the grid nodes >= s:
///   X_{i+1} = exp(c(t_i) dt_i) X_i + sigma(t_i) dW_i.
/// Exact for piecewise-constant c on the grid; the returned path lives on
/// the tail grid [s, T].
SamplePath exact_linear_solution(const MatrixOfTime& c, const MatrixOfTime& sigma, double s,
                                 const Eigen::VectorXd& y, const BrownianPath& w);

}  // namespace girsanov
