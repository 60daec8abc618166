#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "girsanov/gamma_field.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/path.hpp"

namespace girsanov {

/// Per-path exponential-martingale bookkeeping. Step i carries
///   stoch_increment(i) = sign * gamma(t_i)^T dW_i   (left-endpoint gamma)
///   quad_increment(i)  = ||gamma(t_i)||^2 dt_i
/// and the running log-weight at node k is
///   log rho_k = sum_{i<k} stoch - 1/2 sum_{i<k} quad.
/// Everything stays in the log domain; rho itself is only exponentiated
/// inside estimator sums, so the weight is structurally positive.
class LogWeightLedger {
public:
    LogWeightLedger(GridPtr grid, std::vector<double> stoch_inc, std::vector<double> quad_inc,
                    int sign);

    std::size_t step_count() const noexcept { return stoch_inc_.size(); }
    const TimeGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int sign() const noexcept { return sign_; }

    double stoch_increment(std::size_t step) const { return stoch_inc_[step]; }
    double quad_increment(std::size_t step) const { return quad_inc_[step]; }

    /// Running values at grid nodes; index 0 gives 0.
    double log_weight_at(std::size_t node) const { return cum_log_[node]; }
    double cumulative_quad(std::size_t node) const { return cum_quad_[node]; }

    double total_log_weight() const { return cum_log_.back(); }
    double total_quad() const { return cum_quad_.back(); }

private:
    GridPtr grid_;
    std::vector<double> stoch_inc_;
    std::vector<double> quad_inc_;
    std::vector<double> cum_log_;
    std::vector<double> cum_quad_;
    int sign_;
};

/// Ledger for gamma = sigma^+(b-a) from a GammaField. Throws ModelError at
/// the first node where the compatibility residual exceeds the field's
/// tolerance. sign selects the forward (+1) or reverse (-1) exponent.
LogWeightLedger accumulate_log_weight(const GammaField& field, const SamplePath& z,
                                      const BrownianPath& w, int sign);

using GammaFn = std::function<void(double t, const PathView& prefix, Eigen::Ref<Eigen::VectorXd> gamma)>;

/// Same accumulation for a directly supplied gamma functional (used by the
/// spectral module, where gamma comes from the nonlinearity rather than a
/// pseudo-inverse).
LogWeightLedger accumulate_log_weight(const GammaFn& gamma_fn, int gamma_dim, const SamplePath& z,
                                      const BrownianPath& w, int sign);

/// Level-n truncation data derived from a ledger. chi is the per-node
/// indicator [cumulative quad < n] (strict: ties truncate), which is
/// non-increasing along the path; tau_index is the first node at or over
/// the level, or the last node if never reached.
struct TruncationState {
    double level = 0.0;
    std::size_t tau_index = 0;
    std::vector<std::uint8_t> chi;

    bool truncated() const noexcept { return !chi.empty() && chi.back() == 0; }
};

TruncationState truncation_state(const LogWeightLedger& ledger, double n);

/// log rho^n_T: the ledger restricted to steps whose right endpoint still
/// satisfies chi = 1, i.e. step i counts iff cumulative quad at node i+1 is
/// below the level. The retained quadratic mass is therefore <= n, and the
/// full weight is recovered whenever the path never reaches the level.
double truncated_log_weight(const LogWeightLedger& ledger, const TruncationState& state);

/// W*(t) = W(t) - int_0^t gamma ds on the grid:
///   dW*_i = dW_i - gamma(t_i, prefix) dt_i.
BrownianPath apply_drift_shift(const BrownianPath& w, const GammaField& field,
                               const SamplePath& z);

struct TwoSidedReport {
    double forward_log = 0.0;
    double reverse_log = 0.0;
    double discrepancy = 0.0;           // |forward + reverse|
    double relative_discrepancy = 0.0;  // relative to max(1, |forward|, |reverse|)
};

/// Exact discrete duality: the forward ledger under W and the reverse
/// ledger under the shifted W* sum to zero on every path, up to rounding.
TwoSidedReport reverse_log_weight(const LogWeightLedger& forward, const LogWeightLedger& reverse);

/// Noise-free log-weight computed from the path increments alone:
///   sum (b-a)^T M dZ - 1/2 sum (b^T M b - a^T M a) dt,  M = (sigma^+)^T sigma^+.
/// Agrees with the W-based ledger on the grid whenever sigma is invertible
/// along the path. Throws DiagnosticError if sigma^+ a or sigma^+ b is
/// non-finite (the stronger hypotheses this form needs).
double noise_free_log_weight(const CoefficientModel& model, const SamplePath& z,
                             std::optional<double> sv_cutoff = std::nullopt);

struct NovikovReport {
    double sup_quad = 0.0;            // empirical sup over paths of total quad
    double mean_exp_half_quad = 0.0;  // empirical E[exp(quad/2)]
};

/// Purely diagnostic: a finite empirical mean never certifies the
/// exponential-moment condition, it only measures this ensemble.
NovikovReport novikov_report(std::span<const double> total_quads);
NovikovReport novikov_report(std::span<const LogWeightLedger> ledgers);

struct TruncationDecayReport {
    std::size_t event_count = 0;       // paths with total quad >= n and
                                       // truncated stochastic part <= n/4
    double event_fraction = 0.0;
    double max_rho_on_event = 0.0;     // max rho^n_T over those paths
    double reference_bound = 0.0;      // exp(-n/4)
};

/// Surrogate for the infinite-quad regime, which a finite grid cannot
/// produce: on paths whose quadratic mass crosses the level while the
/// truncated stochastic integral stays small, rho^n is pinned near or
/// below exp(-n/4).
TruncationDecayReport truncation_decay_report(std::span<const LogWeightLedger> ledgers, double n);

using RestartMap =
    std::function<SamplePath(std::size_t start_node, const Eigen::VectorXd& y, const BrownianPath& w)>;

/// Restart map running the exponential integrator of the linear reference
/// drift c(t) X with time-only diffusion sigma(t).
RestartMap make_linear_restart(MatrixOfTime c, MatrixOfTime sigma);

/// Restart map running Euler under drift a of the model, from the restart
/// node on, with the same increments.
RestartMap make_euler_restart(CoefficientModel model);

/// Glued truncated solution: equals x_path node-wise up to the crossing
/// node of the level-n quadratic mass, then follows the reference dynamics
/// restarted there with the same increments. Requires a diffusion that does
/// not read the path (probed; throws UnsupportedModelError otherwise).
SamplePath pathwise_truncated_solution(const GammaField& field, const SamplePath& x_path,
                                       const BrownianPath& w, double n, const RestartMap& restart);

}  // namespace girsanov
