#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "girsanov/estimators.hpp"
#include "girsanov/path.hpp"
#include "girsanov/rng.hpp"

namespace girsanov {

/// Finite-mode diagonal model: linear part -lambda_k per mode, noise
/// covariance diagonal q_k, a nonlinearity F on mode coefficients, and
/// e_weights defining the monitoring norm ||Y||_E^2 = sum e_k Y_k^2.
class SpectralModel {
public:
    using Nonlinearity =
        std::function<void(const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out)>;

    SpectralModel(Eigen::VectorXd lambda, Eigen::VectorXd q, Nonlinearity f,
                  Eigen::VectorXd e_weights);

    int mode_count() const noexcept { return static_cast<int>(lambda_.size()); }
    const Eigen::VectorXd& lambda() const noexcept { return lambda_; }
    const Eigen::VectorXd& q() const noexcept { return q_; }
    const Eigen::VectorXd& e_weights() const noexcept { return e_weights_; }

    void nonlinearity(const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) const {
        f_(y, out);
    }

    double e_norm_sq(const Eigen::VectorXd& y) const { return (e_weights_.array() * y.array().square()).sum(); }

private:
    Eigen::VectorXd lambda_;
    Eigen::VectorXd q_;
    Nonlinearity f_;
    Eigen::VectorXd e_weights_;
};

/// Gamma_k = F_k(y) / sqrt(q_k) where q_k > 0, and 0 where q_k = 0 and
/// F_k(y) = 0. A nonzero component on a dead mode throws
/// RangeConditionError: the nonlinearity leaves the range of the noise.
Eigen::VectorXd gamma_from_nonlinearity(const SpectralModel& model, const Eigen::VectorXd& y);

/// Per-(model, grid) cache of the exact per-mode transition coefficients
///   Z_k(t+dt) = exp(-lambda_k dt) Z_k(t) + xi * sqrt(q_k (1 - e^{-2 lambda_k dt}) / (2 lambda_k)).
/// Sampling consumes one standard normal per (step, mode), step-major.
class OuTransition {
public:
    OuTransition(const SpectralModel& model, GridPtr grid);

    /// Exact path at the grid nodes.
    SamplePath sample(const Eigen::VectorXd& x0, CounterRng& rng) const;

    /// Same, also returning the unit innovations xi (modes x steps), which
    /// drive the log-weight accumulation as dW := xi * sqrt(dt).
    SamplePath sample_with_innovations(const Eigen::VectorXd& x0, CounterRng& rng,
                                       Eigen::MatrixXd& xi_out) const;

    const GridPtr& grid_ptr() const noexcept { return grid_; }

private:
    GridPtr grid_;
    Eigen::MatrixXd decay_;        // modes x steps: exp(-lambda_k dt_i)
    Eigen::MatrixXd noise_scale_;  // modes x steps
};

/// One-off convenience wrapper around OuTransition.
SamplePath ou_exact_path(const SpectralModel& model, const Eigen::VectorXd& x0, GridPtr grid,
                         CounterRng& rng);

/// Direct benchmark for the semilinear equation: exponential treatment of
/// the linear part, Euler for the nonlinearity, exact noise:
///   X_{k,i+1} = e^{-lambda_k dt} X_{k,i} + (1 - e^{-lambda_k dt})/lambda_k * F_k(X_i) + noise.
SamplePath semilinear_exponential_euler_path(const SpectralModel& model,
                                             const Eigen::VectorXd& x0, GridPtr grid,
                                             CounterRng& rng);

struct SemilinearRow {
    std::string functional;
    double weighted_mean = 0.0, weighted_stderr = 0.0;
    double direct_mean = 0.0, direct_stderr = 0.0;
    double z = 0.0;
};

struct SemilinearReport {
    std::vector<SemilinearRow> rows;
    double sup_quad = 0.0;       // empirical sup of int ||Gamma||_H^2 ds
    double max_e_norm_sq = 0.0;  // sup over paths and nodes of the E-norm
    double weighted_ess = 0.0;
};

/// Weighted reference ensemble (exact linear dynamics, weights from
/// gamma = Gamma(Z)) against a direct simulation of the semilinear
/// equation, on independent streams; z-scores per functional.
SemilinearReport semilinear_equivalence_experiment(const SpectralModel& model,
                                                   std::span<const NamedFunctional> functionals,
                                                   GridPtr grid, const Eigen::VectorXd& x0,
                                                   std::size_t n_paths,
                                                   std::uint64_t master_seed, int workers);

/// int_0^T sum_k (lambda_k Z_k)^2 / q_k dt along one path (left sums).
/// Diagnostic only; grows without bound in the mode count when
/// lambda_k / sqrt(q_k) is unbounded.
double noise_free_feasibility_quad(const SpectralModel& model, const SamplePath& z);

}  // namespace girsanov
