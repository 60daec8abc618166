#include "girsanov/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "girsanov/gamma_field.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/parallel.hpp"

namespace girsanov {

EstimatorReport estimate_from_samples(std::span<const double> f_values,
                                      std::span<const double> log_weights, EstimatorMode mode) {
    const std::size_t n = f_values.size();
    if (n == 0 || log_weights.size() != n) {
        throw std::invalid_argument("estimate_from_samples: empty or mismatched ensemble");
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());

    KahanSum sum_w, sum_w2, sum_fw;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weights[i] - shift);
        sum_w.add(w);
        sum_w2.add(w * w);
        sum_fw.add(f_values[i] * w);
    }
    const double nd = static_cast<double>(n);

    EstimatorReport report;
    report.ess = sum_w.value() * sum_w.value() / sum_w2.value();
    report.normalization = std::exp(shift) * sum_w.value() / nd;

    if (mode == EstimatorMode::Unnormalized) {
        const double mean_fw = sum_fw.value() / nd;  // still shifted
        report.estimate = std::exp(shift) * mean_fw;
        if (n > 1) {
            KahanSum var;
            for (std::size_t i = 0; i < n; ++i) {
                const double y = f_values[i] * std::exp(log_weights[i] - shift) - mean_fw;
                var.add(y * y);
            }
            report.stderr_ =
                std::exp(shift) * std::sqrt(var.value() / (nd - 1.0)) / std::sqrt(nd);
        }
    } else {
        const double est = sum_fw.value() / sum_w.value();
        report.estimate = est;
        KahanSum var;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = std::exp(log_weights[i] - shift) * (f_values[i] - est);
            var.add(y * y);
        }
        report.stderr_ = std::sqrt(var.value()) / sum_w.value();
    }
    return report;
}

EstimatorReport estimate_under_target(const PathFunctional& f, const WeightedEnsemble& ens,
                                      EstimatorMode mode) {
    if (ens.paths.empty() || ens.paths.size() != ens.log_weights.size()) {
        throw std::invalid_argument("estimate_under_target: empty or mismatched ensemble");
    }
    std::vector<double> values(ens.paths.size());
    for (std::size_t i = 0; i < ens.paths.size(); ++i) {
        values[i] = f(ens.paths[i]);
        if (!std::isfinite(values[i])) {
            throw std::invalid_argument("estimate_under_target: functional not finite on path " +
                                        std::to_string(i));
        }
    }
    return estimate_from_samples(values, ens.log_weights, mode);
}

double effective_sample_size(std::span<const double> log_weights) {
    if (log_weights.empty()) {
        throw std::invalid_argument("effective_sample_size: empty ensemble");
    }
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    KahanSum sum_w, sum_w2;
    for (double lw : log_weights) {
        const double w = std::exp(lw - shift);
        sum_w.add(w);
        sum_w2.add(w * w);
    }
    return sum_w.value() * sum_w.value() / sum_w2.value();
}

MartingaleTest martingale_test(std::span<const double> log_weights) {
    if (log_weights.empty()) {
        throw std::invalid_argument("martingale_test: empty ensemble");
    }
    std::vector<double> ones(log_weights.size(), 1.0);
    const EstimatorReport report =
        estimate_from_samples(ones, log_weights, EstimatorMode::Unnormalized);
    MartingaleTest test;
    test.mean = report.estimate;
    test.stderr_ = report.stderr_;
    if (test.stderr_ > 0.0) {
        test.z_score = (test.mean - 1.0) / test.stderr_;
    } else {
        test.z_score = (test.mean == 1.0) ? 0.0
                                          : std::numeric_limits<double>::infinity() *
                                                (test.mean > 1.0 ? 1.0 : -1.0);
    }
    test.pass = std::abs(test.z_score) <= 3.0;
    return test;
}

std::vector<double> l1_cauchy_from_truncated(
    const std::vector<std::vector<double>>& truncated_log_by_level) {
    if (truncated_log_by_level.size() < 2) {
        throw std::invalid_argument("l1_cauchy_diagnostic: need at least two levels");
    }
    std::vector<double> diffs;
    diffs.reserve(truncated_log_by_level.size() - 1);
    for (std::size_t j = 0; j + 1 < truncated_log_by_level.size(); ++j) {
        const auto& lo = truncated_log_by_level[j];
        const auto& hi = truncated_log_by_level[j + 1];
        if (lo.size() != hi.size() || lo.empty()) {
            throw std::invalid_argument("l1_cauchy_diagnostic: mismatched level columns");
        }
        KahanSum acc;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            acc.add(std::abs(std::exp(hi[i]) - std::exp(lo[i])));
        }
        diffs.push_back(acc.value() / static_cast<double>(lo.size()));
    }
    return diffs;
}

std::vector<double> l1_cauchy_diagnostic(std::span<const LogWeightLedger> ledgers,
                                         std::span<const double> levels) {
    if (levels.size() < 2) {
        throw std::invalid_argument("l1_cauchy_diagnostic: need at least two levels");
    }
    for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
        if (!(levels[j] < levels[j + 1])) {
            throw std::invalid_argument("l1_cauchy_diagnostic: levels must be increasing");
        }
    }
    std::vector<std::vector<double>> by_level(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        by_level[j].reserve(ledgers.size());
        for (const auto& ledger : ledgers) {
            by_level[j].push_back(
                truncated_log_weight(ledger, truncation_state(ledger, levels[j])));
        }
    }
    return l1_cauchy_from_truncated(by_level);
}

std::vector<NamedFunctional> standard_functionals() {
    std::vector<NamedFunctional> fs;
    fs.push_back({"terminal", [](const SamplePath& path) { return path.terminal()(0); }});
    fs.push_back({"sup_norm", [](const SamplePath& path) {
                      double sup = 0.0;
                      for (std::size_t k = 0; k < path.grid().node_count(); ++k) {
                          sup = std::max(sup, path.at(k).norm());
                      }
                      return sup;
                  }});
    fs.push_back({"int_sq", [](const SamplePath& path) {
                      KahanSum acc;
                      for (std::size_t i = 0; i < path.grid().step_count(); ++i) {
                          acc.add(path.at(i).squaredNorm() * path.grid().dt(i));
                      }
                      return acc.value();
                  }});
    return fs;
}

double z_difference(double mean_a, double stderr_a, double mean_b, double stderr_b) {
    const double combined = std::sqrt(stderr_a * stderr_a + stderr_b * stderr_b);
    if (combined == 0.0) {
        return (mean_a == mean_b) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return (mean_a - mean_b) / combined;
}

namespace {

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr plain_mc(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    KahanSum sum;
    for (double v : values) {
        sum.add(v);
    }
    MeanStderr out;
    out.mean = sum.value() / n;
    if (values.size() > 1) {
        KahanSum var;
        for (double v : values) {
            var.add((v - out.mean) * (v - out.mean));
        }
        out.stderr_ = std::sqrt(var.value() / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

// Stream one direct simulation run: functional values per path.
std::vector<std::vector<double>> direct_run(const CoefficientModel& model,
                                            const Eigen::VectorXd& x0,
                                            std::span<const NamedFunctional> functionals,
                                            const GridPtr& grid, std::size_t n_paths,
                                            std::uint64_t master_seed, std::uint64_t run_tag,
                                            int workers) {
    std::vector<std::vector<double>> values(functionals.size(),
                                            std::vector<double>(n_paths));
    parallel_for_index(n_paths, workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(grid, model.noise_dimension(), master_seed,
                                               i | (run_tag << 40));
        const SamplePath x = euler_maruyama(model, DriftSelector::B, x0, w);
        for (std::size_t f = 0; f < functionals.size(); ++f) {
            values[f][i] = functionals[f].fn(x);
        }
    });
    return values;
}

}  // namespace

CompareReport compare_direct_vs_weighted(const CoefficientModel& model, const Eigen::VectorXd& x0,
                                         std::span<const NamedFunctional> functionals,
                                         GridPtr grid, const CompareOptions& opts) {
    if (opts.n_paths == 0) {
        throw std::invalid_argument("compare_direct_vs_weighted: need at least one path");
    }
    const auto direct1 =
        direct_run(model, x0, functionals, grid, opts.n_paths, opts.master_seed, 1, opts.workers);
    const auto direct2 =
        direct_run(model, x0, functionals, grid, opts.n_paths, opts.master_seed, 2, opts.workers);

    // Weighted run: reference dynamics under drift a, weights from gamma.
    const GammaField field(model);
    std::vector<std::vector<double>> weighted_values(functionals.size(),
                                                     std::vector<double>(opts.n_paths));
    std::vector<double> log_weights(opts.n_paths);
    parallel_for_index(opts.n_paths, opts.workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(grid, model.noise_dimension(), opts.master_seed,
                                               i | (std::uint64_t{3} << 40));
        const SamplePath z = euler_maruyama(model, DriftSelector::A, x0, w);
        const LogWeightLedger ledger = accumulate_log_weight(field, z, w, 1);
        log_weights[i] = ledger.total_log_weight();
        for (std::size_t f = 0; f < functionals.size(); ++f) {
            weighted_values[f][i] = functionals[f].fn(z);
        }
    });

    CompareReport report;
    report.weighted_ess = effective_sample_size(log_weights);
    for (std::size_t f = 0; f < functionals.size(); ++f) {
        const MeanStderr d1 = plain_mc(direct1[f]);
        const MeanStderr d2 = plain_mc(direct2[f]);
        const EstimatorReport wr = estimate_from_samples(weighted_values[f], log_weights,
                                                         EstimatorMode::SelfNormalized);
        CompareRow row;
        row.functional = functionals[f].name;
        row.direct_mean = d1.mean;
        row.direct_stderr = d1.stderr_;
        row.direct2_mean = d2.mean;
        row.direct2_stderr = d2.stderr_;
        row.weighted_mean = wr.estimate;
        row.weighted_stderr = wr.stderr_;
        row.z_direct_vs_weighted = z_difference(d1.mean, d1.stderr_, wr.estimate, wr.stderr_);
        row.z_direct_vs_direct = z_difference(d1.mean, d1.stderr_, d2.mean, d2.stderr_);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace girsanov
