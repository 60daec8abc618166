#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "girsanov/coefficients.hpp"
#include "girsanov/path.hpp"
#include "girsanov/weight_ledger.hpp"

namespace girsanov {

struct EnsembleMeta {
    std::string model;
    std::uint64_t master_seed = 0;
    GridPtr grid;
};

/// Reference-measure paths with their log-weights; the pair represents the
/// target law through the reference one.
struct WeightedEnsemble {
    std::vector<SamplePath> paths;
    std::vector<double> log_weights;
    EnsembleMeta meta;
};

struct EstimatorReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;            // (sum w)^2 / sum w^2
    double normalization = 0.0;  // mean weight
};

enum class EstimatorMode { Unnormalized, SelfNormalized };

using PathFunctional = std::function<double(const SamplePath&)>;

struct NamedFunctional {
    std::string name;
    PathFunctional fn;
};

/// Core estimator on already-evaluated functional values. Weights enter
/// through exp(log_weight - max log_weight); the self-normalized stderr is
/// the delta-method linearization.
EstimatorReport estimate_from_samples(std::span<const double> f_values,
                                      std::span<const double> log_weights, EstimatorMode mode);

EstimatorReport estimate_under_target(const PathFunctional& f, const WeightedEnsemble& ens,
                                      EstimatorMode mode);

/// (sum w)^2 / sum w^2 with max-log shifting; invariant under a constant
/// shift of all log-weights.
double effective_sample_size(std::span<const double> log_weights);

struct MartingaleTest {
    double mean = 0.0;
    double stderr_ = 0.0;
    double z_score = 0.0;
    bool pass = false;  // |z| <= 3
};

/// Checks the unnormalized mean weight against 1.
MartingaleTest martingale_test(std::span<const double> log_weights);

/// Consecutive-level L1 distances E|rho^{n_{j+1}} - rho^{n_j}| of truncated
/// weights; the total-variation surrogate. Requires at least two levels.
std::vector<double> l1_cauchy_diagnostic(std::span<const LogWeightLedger> ledgers,
                                         std::span<const double> levels);

/// Same reduction on a precomputed [level][path] matrix of truncated
/// log-weights (for streamed ensembles that never keep ledgers).
std::vector<double> l1_cauchy_from_truncated(
    const std::vector<std::vector<double>>& truncated_log_by_level);

/// X(T) first component, sup over nodes of the Euclidean norm, and the
/// left-sum integral of the squared norm.
std::vector<NamedFunctional> standard_functionals();

struct CompareRow {
    std::string functional;
    double direct_mean = 0.0, direct_stderr = 0.0;
    double direct2_mean = 0.0, direct2_stderr = 0.0;
    double weighted_mean = 0.0, weighted_stderr = 0.0;
    double z_direct_vs_weighted = 0.0;
    double z_direct_vs_direct = 0.0;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    double weighted_ess = 0.0;
};

struct CompareOptions {
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    int workers = 1;
};

/// Dual estimation of target-law expectations: (i) direct Euler under
/// drift b, twice with independent streams, and (ii) the weighted
/// reference ensemble under drift a. Reports pairwise z-scores per
/// functional; the direct pair is the uniqueness-in-law check at the
/// level of statistics.
CompareReport compare_direct_vs_weighted(const CoefficientModel& model, const Eigen::VectorXd& x0,
                                         std::span<const NamedFunctional> functionals,
                                         GridPtr grid, const CompareOptions& opts);

/// z-score of the difference of two independent estimates.
double z_difference(double mean_a, double stderr_a, double mean_b, double stderr_b);

}  // namespace girsanov
