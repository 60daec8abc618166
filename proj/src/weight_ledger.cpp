#include "girsanov/weight_ledger.hpp"

#include <cmath>
#include <stdexcept>

#include "girsanov/errors.hpp"
#include "girsanov/parallel.hpp"
#include "girsanov/pseudo_inverse.hpp"

namespace girsanov {

namespace {

void require_shared_grid(const TimeGrid& a, const TimeGrid& b, const char* who) {
    if (!same_mesh(a, b)) {
        throw std::invalid_argument(std::string(who) + ": grids do not match");
    }
}

}  // namespace

LogWeightLedger::LogWeightLedger(GridPtr grid, std::vector<double> stoch_inc,
                                 std::vector<double> quad_inc, int sign)
    : grid_(std::move(grid)),
      stoch_inc_(std::move(stoch_inc)),
      quad_inc_(std::move(quad_inc)),
      sign_(sign) {
    if (!grid_) {
        throw std::invalid_argument("LogWeightLedger: null grid");
    }
    if (stoch_inc_.size() != grid_->step_count() || quad_inc_.size() != grid_->step_count()) {
        throw std::invalid_argument("LogWeightLedger: one increment per grid step required");
    }
    if (sign_ != 1 && sign_ != -1) {
        throw std::invalid_argument("LogWeightLedger: sign must be +1 or -1");
    }
    cum_log_.resize(grid_->node_count());
    cum_quad_.resize(grid_->node_count());
    cum_log_[0] = 0.0;
    cum_quad_[0] = 0.0;
    KahanSum logw;
    KahanSum quad;
    for (std::size_t i = 0; i < stoch_inc_.size(); ++i) {
        if (quad_inc_[i] < 0.0 || !std::isfinite(quad_inc_[i]) || !std::isfinite(stoch_inc_[i])) {
            throw NumericError("LogWeightLedger: invalid increment", i);
        }
        logw.add(stoch_inc_[i] - 0.5 * quad_inc_[i]);
        quad.add(quad_inc_[i]);
        cum_log_[i + 1] = logw.value();
        cum_quad_[i + 1] = quad.value();
    }
}

namespace {

LogWeightLedger accumulate_impl(const SamplePath& z, const BrownianPath& w, int sign,
                                const std::function<void(std::size_t, double,
                                                         Eigen::Ref<Eigen::VectorXd>)>& gamma_at,
                                int gamma_dim) {
    require_shared_grid(z.grid(), w.grid(), "accumulate_log_weight");
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("accumulate_log_weight: sign must be +1 or -1");
    }
    const TimeGrid& grid = z.grid();
    const std::size_t steps = grid.step_count();
    std::vector<double> stoch(steps);
    std::vector<double> quad(steps);
    Eigen::VectorXd gamma(gamma_dim);
    for (std::size_t i = 0; i < steps; ++i) {
        gamma_at(i, grid.node(i), gamma);
        stoch[i] = sign * gamma.dot(w.increment(i));
        quad[i] = gamma.squaredNorm() * grid.dt(i);
    }
    return LogWeightLedger(z.grid_ptr(), std::move(stoch), std::move(quad), sign);
}

}  // namespace

LogWeightLedger accumulate_log_weight(const GammaField& field, const SamplePath& z,
                                      const BrownianPath& w, int sign) {
    if (field.model().noise_dimension() != w.dimension()) {
        throw std::invalid_argument("accumulate_log_weight: noise dimension mismatch");
    }
    GammaField::Workspace ws;
    ws.resize(field.model().dimension(), field.model().noise_dimension());
    return accumulate_impl(
        z, w, sign,
        [&](std::size_t node, double t, Eigen::Ref<Eigen::VectorXd> gamma) {
            bool consistent = false;
            const PathView prefix(z, node);
            const double residual = field.gamma_at_into(t, prefix, ws, gamma, consistent);
            if (!consistent) {
                throw ModelError("accumulate_log_weight: sigma*gamma = b-a unsolvable, residual " +
                                     std::to_string(residual),
                                 node);
            }
        },
        field.model().noise_dimension());
}

LogWeightLedger accumulate_log_weight(const GammaFn& gamma_fn, int gamma_dim, const SamplePath& z,
                                      const BrownianPath& w, int sign) {
    if (gamma_dim != w.dimension()) {
        throw std::invalid_argument("accumulate_log_weight: noise dimension mismatch");
    }
    return accumulate_impl(
        z, w, sign,
        [&](std::size_t node, double t, Eigen::Ref<Eigen::VectorXd> gamma) {
            gamma_fn(t, PathView(z, node), gamma);
            if (!gamma.allFinite()) {
                throw NumericError("accumulate_log_weight: non-finite gamma", node);
            }
        },
        gamma_dim);
}

TruncationState truncation_state(const LogWeightLedger& ledger, double n) {
    if (!(n > 0.0)) {
        throw std::invalid_argument("truncation_state: level must be positive");
    }
    const std::size_t nodes = ledger.grid().node_count();
    TruncationState state;
    state.level = n;
    state.chi.assign(nodes, 1);
    state.tau_index = nodes - 1;
    bool crossed = false;
    for (std::size_t k = 0; k < nodes; ++k) {
        if (!crossed && ledger.cumulative_quad(k) >= n) {
            crossed = true;
            state.tau_index = k;
        }
        if (crossed) {
            state.chi[k] = 0;
        }
    }
    return state;
}

double truncated_log_weight(const LogWeightLedger& ledger, const TruncationState& state) {
    if (state.chi.size() != ledger.grid().node_count()) {
        throw std::invalid_argument("truncated_log_weight: state does not match ledger");
    }
    KahanSum logw;
    for (std::size_t i = 0; i < ledger.step_count(); ++i) {
        if (state.chi[i + 1] == 0) {
            break;  // chi is non-increasing
        }
        logw.add(ledger.stoch_increment(i) - 0.5 * ledger.quad_increment(i));
    }
    return logw.value();
}

BrownianPath apply_drift_shift(const BrownianPath& w, const GammaField& field,
                               const SamplePath& z) {
    require_shared_grid(z.grid(), w.grid(), "apply_drift_shift");
    const TimeGrid& grid = w.grid();
    const int m = w.dimension();
    if (field.model().noise_dimension() != m) {
        throw std::invalid_argument("apply_drift_shift: noise dimension mismatch");
    }
    Eigen::MatrixXd shifted(m, grid.step_count());
    GammaField::Workspace ws;
    ws.resize(field.model().dimension(), m);
    Eigen::VectorXd gamma(m);
    for (std::size_t i = 0; i < grid.step_count(); ++i) {
        bool consistent = false;
        const double residual =
            field.gamma_at_into(grid.node(i), PathView(z, i), ws, gamma, consistent);
        if (!consistent) {
            throw ModelError("apply_drift_shift: inconsistent gamma, residual " +
                                 std::to_string(residual),
                             i);
        }
        shifted.col(i) = w.increment(i) - gamma * grid.dt(i);
    }
    return BrownianPath(w.grid_ptr(), std::move(shifted), w.stream_id());
}

TwoSidedReport reverse_log_weight(const LogWeightLedger& forward,
                                  const LogWeightLedger& reverse) {
    require_shared_grid(forward.grid(), reverse.grid(), "reverse_log_weight");
    TwoSidedReport report;
    report.forward_log = forward.total_log_weight();
    report.reverse_log = reverse.total_log_weight();
    report.discrepancy = std::abs(report.forward_log + report.reverse_log);
    const double scale =
        std::max({1.0, std::abs(report.forward_log), std::abs(report.reverse_log)});
    report.relative_discrepancy = report.discrepancy / scale;
    return report;
}

double noise_free_log_weight(const CoefficientModel& model, const SamplePath& z,
                             std::optional<double> sv_cutoff) {
    const TimeGrid& grid = z.grid();
    const int d = model.dimension();
    const int m = model.noise_dimension();
    Eigen::VectorXd a(d), b(d);
    Eigen::MatrixXd sigma(d, m);
    KahanSum stoch;
    KahanSum drift_part;
    for (std::size_t i = 0; i < grid.step_count(); ++i) {
        const double t = grid.node(i);
        const PathView prefix(z, i);
        model.drift(DriftSelector::A, t, prefix, a);
        model.drift(DriftSelector::B, t, prefix, b);
        model.diffusion(t, prefix, sigma);
        Eigen::MatrixXd pinv;
        if (d == 1 && m == 1) {
            pinv.resize(1, 1);
            pinv(0, 0) = (std::abs(sigma(0, 0)) > sv_cutoff.value_or(0.0)) ? 1.0 / sigma(0, 0) : 0.0;
        } else {
            pinv = sv_cutoff ? pseudo_inverse(sigma, *sv_cutoff) : pseudo_inverse(sigma);
        }
        const Eigen::VectorXd gamma_a = pinv * a;
        const Eigen::VectorXd gamma_b = pinv * b;
        if (!gamma_a.allFinite() || !gamma_b.allFinite()) {
            throw DiagnosticError(
                "noise_free_log_weight: sigma^+ a or sigma^+ b non-finite at node " +
                std::to_string(i));
        }
        // M = (sigma^+)^T sigma^+; exponent uses path increments only.
        const Eigen::VectorXd m_rhs = pinv.transpose() * (gamma_b - gamma_a);
        const Eigen::VectorXd dz = z.at(i + 1) - z.at(i);
        stoch.add(m_rhs.dot(dz));
        drift_part.add((gamma_b.squaredNorm() - gamma_a.squaredNorm()) * grid.dt(i));
    }
    return stoch.value() - 0.5 * drift_part.value();
}

NovikovReport novikov_report(std::span<const double> total_quads) {
    NovikovReport report;
    if (total_quads.empty()) {
        return report;
    }
    KahanSum mean;
    for (double q : total_quads) {
        report.sup_quad = std::max(report.sup_quad, q);
        mean.add(std::exp(0.5 * q));
    }
    report.mean_exp_half_quad = mean.value() / static_cast<double>(total_quads.size());
    return report;
}

NovikovReport novikov_report(std::span<const LogWeightLedger> ledgers) {
    std::vector<double> quads;
    quads.reserve(ledgers.size());
    for (const auto& ledger : ledgers) {
        quads.push_back(ledger.total_quad());
    }
    return novikov_report(quads);
}

TruncationDecayReport truncation_decay_report(std::span<const LogWeightLedger> ledgers,
                                              double n) {
    if (!(n > 0.0)) {
        throw std::invalid_argument("truncation_decay_report: level must be positive");
    }
    TruncationDecayReport report;
    report.reference_bound = std::exp(-0.25 * n);
    for (const auto& ledger : ledgers) {
        if (ledger.total_quad() < n) {
            continue;
        }
        const TruncationState state = truncation_state(ledger, n);
        KahanSum stoch;
        for (std::size_t i = 0; i < ledger.step_count(); ++i) {
            if (state.chi[i + 1] == 0) {
                break;
            }
            stoch.add(ledger.stoch_increment(i));
        }
        if (stoch.value() <= 0.25 * n) {
            report.event_count += 1;
            report.max_rho_on_event =
                std::max(report.max_rho_on_event,
                         std::exp(truncated_log_weight(ledger, state)));
        }
    }
    if (!ledgers.empty()) {
        report.event_fraction =
            static_cast<double>(report.event_count) / static_cast<double>(ledgers.size());
    }
    return report;
}

RestartMap make_linear_restart(MatrixOfTime c, MatrixOfTime sigma) {
    return [c = std::move(c), sigma = std::move(sigma)](
               std::size_t start_node, const Eigen::VectorXd& y, const BrownianPath& w) {
        return exact_linear_solution(c, sigma, w.grid().node(start_node), y, w);
    };
}

RestartMap make_euler_restart(CoefficientModel model) {
    return [model = std::move(model)](std::size_t start_node, const Eigen::VectorXd& y,
                                      const BrownianPath& w) {
        const TimeGrid& grid = w.grid();
        std::vector<double> tail_nodes(grid.nodes().begin() +
                                           static_cast<std::ptrdiff_t>(start_node),
                                       grid.nodes().end());
        GridPtr tail_grid = share(TimeGrid(std::move(tail_nodes)));
        Eigen::MatrixXd tail_inc =
            w.increments().rightCols(w.increments().cols() -
                                     static_cast<Eigen::Index>(start_node));
        const BrownianPath tail_w(tail_grid, std::move(tail_inc), w.stream_id());
        return euler_maruyama(model, DriftSelector::A, y, tail_w);
    };
}

namespace {

// The gluing construction assumes the diffusion never reads the path.
// Probe a few nodes with fully perturbed values; any change disqualifies
// the model.
void require_time_only_diffusion(const CoefficientModel& model, const SamplePath& path) {
    const TimeGrid& grid = path.grid();
    const int d = model.dimension();
    const int m = model.noise_dimension();
    Eigen::MatrixXd base_out(d, m), probe_out(d, m);
    Eigen::MatrixXd perturbed = path.values();
    for (Eigen::Index c = 0; c < perturbed.cols(); ++c) {
        for (Eigen::Index r = 0; r < perturbed.rows(); ++r) {
            perturbed(r, c) += 0.318309886 * static_cast<double>(r + c + 1);
        }
    }
    const std::size_t nodes = grid.node_count();
    for (std::size_t probe = 0; probe < 3; ++probe) {
        const std::size_t i = (probe * (nodes - 1)) / 2;
        model.diffusion(grid.node(i), PathView(path, i), base_out);
        model.diffusion(grid.node(i), PathView(grid, perturbed, i), probe_out);
        if ((base_out.array() != probe_out.array()).any()) {
            throw UnsupportedModelError(
                "pathwise_truncated_solution: diffusion depends on the path");
        }
    }
}

}  // namespace

SamplePath pathwise_truncated_solution(const GammaField& field, const SamplePath& x_path,
                                       const BrownianPath& w, double n,
                                       const RestartMap& restart) {
    require_shared_grid(x_path.grid(), w.grid(), "pathwise_truncated_solution");
    require_time_only_diffusion(field.model(), x_path);

    // Quadratic mass of gamma along the supplied path decides the crossing.
    const LogWeightLedger ledger = accumulate_log_weight(field, x_path, w, 1);
    const TruncationState state = truncation_state(ledger, n);
    if (!state.truncated()) {
        return x_path;
    }

    const std::size_t tau = state.tau_index;
    const SamplePath tail = restart(tau, x_path.at(tau), w);
    Eigen::MatrixXd values = x_path.values();
    const std::size_t nodes = x_path.grid().node_count();
    for (std::size_t k = tau; k < nodes; ++k) {
        values.col(k) = tail.at(k - tau);
    }
    return SamplePath(x_path.grid_ptr(), std::move(values));
}

}  // namespace girsanov
