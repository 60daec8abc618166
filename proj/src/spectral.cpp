#include "girsanov/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "girsanov/errors.hpp"
#include "girsanov/parallel.hpp"

namespace girsanov {

SpectralModel::SpectralModel(Eigen::VectorXd lambda, Eigen::VectorXd q, Nonlinearity f,
                             Eigen::VectorXd e_weights)
    : lambda_(std::move(lambda)), q_(std::move(q)), f_(std::move(f)),
      e_weights_(std::move(e_weights)) {
    if (lambda_.size() < 1) {
        throw std::invalid_argument("SpectralModel: need at least one mode");
    }
    if (q_.size() != lambda_.size() || e_weights_.size() != lambda_.size()) {
        throw std::invalid_argument("SpectralModel: lambda, q, e_weights sizes must match");
    }
    if ((lambda_.array() <= 0.0).any()) {
        throw std::invalid_argument("SpectralModel: lambda_k must be positive");
    }
    if ((q_.array() < 0.0).any()) {
        throw std::invalid_argument("SpectralModel: q_k must be non-negative");
    }
    if ((e_weights_.array() <= 0.0).any()) {
        throw std::invalid_argument("SpectralModel: e_weights must be positive");
    }
    if (!f_) {
        throw std::invalid_argument("SpectralModel: nonlinearity required");
    }
}

Eigen::VectorXd gamma_from_nonlinearity(const SpectralModel& model, const Eigen::VectorXd& y) {
    const int n = model.mode_count();
    if (y.size() != n) {
        throw std::invalid_argument("gamma_from_nonlinearity: mode count mismatch");
    }
    Eigen::VectorXd f(n);
    model.nonlinearity(y, f);
    Eigen::VectorXd gamma(n);
    for (int k = 0; k < n; ++k) {
        const double qk = model.q()(k);
        if (qk > 0.0) {
            gamma(k) = f(k) / std::sqrt(qk);
        } else if (f(k) == 0.0) {
            gamma(k) = 0.0;
        } else {
            throw RangeConditionError(
                "gamma_from_nonlinearity: nonlinearity acts on mode " + std::to_string(k + 1) +
                " which carries no noise");
        }
    }
    return gamma;
}

OuTransition::OuTransition(const SpectralModel& model, GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) {
        throw std::invalid_argument("OuTransition: null grid");
    }
    const int n = model.mode_count();
    const std::size_t steps = grid_->step_count();
    decay_.resize(n, static_cast<Eigen::Index>(steps));
    noise_scale_.resize(n, static_cast<Eigen::Index>(steps));
    for (std::size_t i = 0; i < steps; ++i) {
        const double dt = grid_->dt(i);
        for (int k = 0; k < n; ++k) {
            const double lam = model.lambda()(k);
            const double a = std::exp(-lam * dt);
            decay_(k, static_cast<Eigen::Index>(i)) = a;
            noise_scale_(k, static_cast<Eigen::Index>(i)) =
                std::sqrt(model.q()(k) * (1.0 - a * a) / (2.0 * lam));
        }
    }
}

SamplePath OuTransition::sample(const Eigen::VectorXd& x0, CounterRng& rng) const {
    Eigen::MatrixXd xi_unused;
    return sample_with_innovations(x0, rng, xi_unused);
}

SamplePath OuTransition::sample_with_innovations(const Eigen::VectorXd& x0, CounterRng& rng,
                                                 Eigen::MatrixXd& xi_out) const {
    const int n = static_cast<int>(decay_.rows());
    if (x0.size() != n) {
        throw std::invalid_argument("OuTransition: x0 mode count mismatch");
    }
    const std::size_t steps = grid_->step_count();
    Eigen::MatrixXd values(n, static_cast<Eigen::Index>(steps) + 1);
    xi_out.resize(n, static_cast<Eigen::Index>(steps));
    values.col(0) = x0;
    for (std::size_t i = 0; i < steps; ++i) {
        const Eigen::Index j = static_cast<Eigen::Index>(i);
        for (int k = 0; k < n; ++k) {
            const double xi = rng.next_normal();
            xi_out(k, j) = xi;
            values(k, j + 1) = decay_(k, j) * values(k, j) + noise_scale_(k, j) * xi;
        }
    }
    return SamplePath(grid_, std::move(values));
}

SamplePath ou_exact_path(const SpectralModel& model, const Eigen::VectorXd& x0, GridPtr grid,
                         CounterRng& rng) {
    return OuTransition(model, std::move(grid)).sample(x0, rng);
}

SamplePath semilinear_exponential_euler_path(const SpectralModel& model,
                                             const Eigen::VectorXd& x0, GridPtr grid,
                                             CounterRng& rng) {
    const int n = model.mode_count();
    if (x0.size() != n) {
        throw std::invalid_argument("semilinear_exponential_euler_path: x0 mode count mismatch");
    }
    const TimeGrid& g = *grid;
    const std::size_t steps = g.step_count();
    Eigen::MatrixXd values(n, static_cast<Eigen::Index>(steps) + 1);
    values.col(0) = x0;
    Eigen::VectorXd f(n);
    for (std::size_t i = 0; i < steps; ++i) {
        const Eigen::Index j = static_cast<Eigen::Index>(i);
        const double dt = g.dt(i);
        model.nonlinearity(values.col(j), f);
        for (int k = 0; k < n; ++k) {
            const double lam = model.lambda()(k);
            const double a = std::exp(-lam * dt);
            const double phi = (1.0 - a) / lam;  // int_0^dt e^{-lam (dt-s)} ds
            values(k, j + 1) = a * values(k, j) + phi * f(k) +
                               std::sqrt(model.q()(k) * (1.0 - a * a) / (2.0 * lam)) *
                                   rng.next_normal();
        }
    }
    return SamplePath(std::move(grid), std::move(values));
}

SemilinearReport semilinear_equivalence_experiment(const SpectralModel& model,
                                                   std::span<const NamedFunctional> functionals,
                                                   GridPtr grid, const Eigen::VectorXd& x0,
                                                   std::size_t n_paths,
                                                   std::uint64_t master_seed, int workers) {
    if (n_paths == 0) {
        throw std::invalid_argument("semilinear_equivalence_experiment: need paths");
    }
    const OuTransition transition(model, grid);
    const TimeGrid& g = *grid;
    const std::size_t steps = g.step_count();
    const int n = model.mode_count();

    // Weighted side: exact linear reference, gamma = Gamma(Z) at left nodes.
    std::vector<std::vector<double>> weighted_values(functionals.size(),
                                                     std::vector<double>(n_paths));
    std::vector<double> log_weights(n_paths);
    std::vector<double> quads(n_paths);
    std::vector<double> e_norms(n_paths);
    parallel_for_index(n_paths, workers, [&](std::size_t p) {
        CounterRng rng(master_seed, p | (std::uint64_t{1} << 40));
        Eigen::MatrixXd xi;
        const SamplePath z = transition.sample_with_innovations(x0, rng, xi);
        KahanSum stoch;
        KahanSum quad;
        double max_e = 0.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const Eigen::VectorXd yi = z.at(i);
            max_e = std::max(max_e, model.e_norm_sq(yi));
            const Eigen::VectorXd gamma = gamma_from_nonlinearity(model, yi);
            const double sqrt_dt = std::sqrt(g.dt(i));
            stoch.add(gamma.dot(xi.col(static_cast<Eigen::Index>(i))) * sqrt_dt);
            quad.add(gamma.squaredNorm() * g.dt(i));
        }
        max_e = std::max(max_e, model.e_norm_sq(z.terminal()));
        log_weights[p] = stoch.value() - 0.5 * quad.value();
        quads[p] = quad.value();
        e_norms[p] = max_e;
        for (std::size_t f = 0; f < functionals.size(); ++f) {
            weighted_values[f][p] = functionals[f].fn(z);
        }
    });

    // Direct side, independent streams.
    std::vector<std::vector<double>> direct_values(functionals.size(),
                                                   std::vector<double>(n_paths));
    parallel_for_index(n_paths, workers, [&](std::size_t p) {
        CounterRng rng(master_seed, p | (std::uint64_t{2} << 40));
        const SamplePath x = semilinear_exponential_euler_path(model, x0, grid, rng);
        for (std::size_t f = 0; f < functionals.size(); ++f) {
            direct_values[f][p] = functionals[f].fn(x);
        }
    });

    SemilinearReport report;
    report.weighted_ess = effective_sample_size(log_weights);
    for (double q : quads) {
        report.sup_quad = std::max(report.sup_quad, q);
    }
    for (double e : e_norms) {
        report.max_e_norm_sq = std::max(report.max_e_norm_sq, e);
    }
    for (std::size_t f = 0; f < functionals.size(); ++f) {
        const EstimatorReport wr = estimate_from_samples(weighted_values[f], log_weights,
                                                         EstimatorMode::SelfNormalized);
        KahanSum sum;
        for (double v : direct_values[f]) {
            sum.add(v);
        }
        const double nd = static_cast<double>(n_paths);
        const double mean = sum.value() / nd;
        double stderr_d = 0.0;
        if (n_paths > 1) {
            KahanSum var;
            for (double v : direct_values[f]) {
                var.add((v - mean) * (v - mean));
            }
            stderr_d = std::sqrt(var.value() / (nd - 1.0)) / std::sqrt(nd);
        }
        SemilinearRow row;
        row.functional = functionals[f].name;
        row.weighted_mean = wr.estimate;
        row.weighted_stderr = wr.stderr_;
        row.direct_mean = mean;
        row.direct_stderr = stderr_d;
        row.z = z_difference(wr.estimate, wr.stderr_, mean, stderr_d);
        report.rows.push_back(std::move(row));
    }
    return report;
}

double noise_free_feasibility_quad(const SpectralModel& model, const SamplePath& z) {
    const TimeGrid& g = z.grid();
    KahanSum acc;
    for (std::size_t i = 0; i < g.step_count(); ++i) {
        double s = 0.0;
        for (int k = 0; k < model.mode_count(); ++k) {
            const double qk = model.q()(k);
            if (qk <= 0.0) {
                throw DiagnosticError("noise_free_feasibility_quad: needs q_k > 0 on every mode");
            }
            const double lz = model.lambda()(k) * z.values()(k, static_cast<Eigen::Index>(i));
            s += lz * lz / qk;
        }
        acc.add(s * g.dt(i));
    }
    return acc.value();
}

}  // namespace girsanov
