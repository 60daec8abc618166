#include <doctest.h>

#include <cmath>
#include <limits>

#include "girsanov/estimators.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/model_registry.hpp"
#include "girsanov/weight_ledger.hpp"

using namespace girsanov;

TEST_CASE("estimate_from_samples basics") {
    SUBCASE("unit weights reduce to the plain mean") {
        const std::vector<double> f = {1.0, 2.0, 3.0, 6.0};
        const std::vector<double> logw(4, 0.0);
        const EstimatorReport unnorm =
            estimate_from_samples(f, logw, EstimatorMode::Unnormalized);
        CHECK(unnorm.estimate == 3.0);
        const EstimatorReport norm =
            estimate_from_samples(f, logw, EstimatorMode::SelfNormalized);
        CHECK(norm.estimate == 3.0);
        CHECK(norm.ess == 4.0);
        CHECK(norm.normalization == 1.0);
    }

    SUBCASE("unnormalized mean of F = 1 is the mean weight") {
        const std::vector<double> logw = {0.0, std::log(2.0), std::log(0.5)};
        const std::vector<double> ones(3, 1.0);
        const EstimatorReport report =
            estimate_from_samples(ones, logw, EstimatorMode::Unnormalized);
        CHECK(report.estimate == doctest::Approx((1.0 + 2.0 + 0.5) / 3.0).epsilon(1e-14));
        CHECK(report.estimate == doctest::Approx(report.normalization).epsilon(1e-15));
    }

    SUBCASE("self-normalized F = 1 is exactly one") {
        const std::vector<double> logw = {-2.0, 1.5, 0.25, -7.0};
        const std::vector<double> ones(4, 1.0);
        CHECK(estimate_from_samples(ones, logw, EstimatorMode::SelfNormalized).estimate == 1.0);
    }

    SUBCASE("unnormalized estimator is linear on exactly representable data") {
        const std::vector<double> logw = {0.0, 0.0, -std::numeric_limits<double>::infinity(),
                                          0.0};
        const std::vector<double> f = {1.0, 2.0, 5.0, 3.0};
        const std::vector<double> g = {4.0, -2.0, 7.0, 1.0};
        std::vector<double> combo(4);
        for (int i = 0; i < 4; ++i) {
            combo[i] = 3.0 * f[i] + g[i];
        }
        const double ef =
            estimate_from_samples(f, logw, EstimatorMode::Unnormalized).estimate;
        const double eg =
            estimate_from_samples(g, logw, EstimatorMode::Unnormalized).estimate;
        const double ec =
            estimate_from_samples(combo, logw, EstimatorMode::Unnormalized).estimate;
        CHECK(ec == 3.0 * ef + eg);
    }

    CHECK_THROWS_AS(estimate_from_samples({}, {}, EstimatorMode::Unnormalized),
                    std::invalid_argument);
}

TEST_CASE("estimate_under_target on a stored ensemble") {
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 8));
    WeightedEnsemble ens;
    ens.meta.grid = grid;
    for (int p = 0; p < 4; ++p) {
        Eigen::MatrixXd values =
            Eigen::MatrixXd::Constant(1, 9, static_cast<double>(p));
        ens.paths.emplace_back(grid, std::move(values));
        ens.log_weights.push_back(0.0);
    }
    const PathFunctional terminal = [](const SamplePath& path) { return path.terminal()(0); };
    const EstimatorReport report =
        estimate_under_target(terminal, ens, EstimatorMode::SelfNormalized);
    CHECK(report.estimate == 1.5);

    WeightedEnsemble empty;
    CHECK_THROWS_AS(estimate_under_target(terminal, empty, EstimatorMode::Unnormalized),
                    std::invalid_argument);
}

TEST_CASE("effective_sample_size") {
    SUBCASE("equal weights give N") {
        const std::vector<double> logw(128, -3.25);
        CHECK(effective_sample_size(logw) == 128.0);
    }
    SUBCASE("weights (1,1,0,0) give 2") {
        const double ninf = -std::numeric_limits<double>::infinity();
        const std::vector<double> logw = {0.0, 0.0, ninf, ninf};
        CHECK(effective_sample_size(logw) == 2.0);
    }
    SUBCASE("one dominant weight approaches 1") {
        const std::vector<double> logw = {0.0, -60.0, -60.0, -60.0};
        const double ess = effective_sample_size(logw);
        CHECK(ess >= 1.0);
        CHECK(ess <= 1.0 + 1e-12);
    }
    SUBCASE("shift invariance is bit-exact on representable shifts") {
        const std::vector<double> logw = {-0.5, 0.25, -1.25, 2.0};
        std::vector<double> shifted = logw;
        for (double& v : shifted) {
            v += 256.0;
        }
        CHECK(effective_sample_size(logw) == effective_sample_size(shifted));
    }
}

TEST_CASE("martingale_test behavior") {
    SUBCASE("unit weights give z = 0") {
        const std::vector<double> logw(16, 0.0);
        const MartingaleTest test = martingale_test(logw);
        CHECK(test.mean == 1.0);
        CHECK(test.z_score == 0.0);
        CHECK(test.pass);
    }
    SUBCASE("small constant shift with many paths passes") {
        // Lognormal weights with exact mean 1; 20000 draws.
        const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "0.3"}});
        const GammaField field(spec.model);
        const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 32));
        std::vector<double> logw(20000);
        for (std::size_t p = 0; p < logw.size(); ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 21, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            logw[p] = accumulate_log_weight(field, z, w, 1).total_log_weight();
        }
        CHECK(martingale_test(logw).pass);

        // Deliberately inflate every weight by 10 percent.
        std::vector<double> biased = logw;
        const double bump = std::log(1.1);
        for (double& v : biased) {
            v += bump;
        }
        CHECK_FALSE(martingale_test(biased).pass);
    }
}

TEST_CASE("l1 cauchy diagnostic") {
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));

    SUBCASE("levels above the sup quad give exact zeros") {
        const ModelSpec spec = build_sde_model("path_dependent", {{"scale", "0.5"}});
        const GammaField field(spec.model);
        std::vector<LogWeightLedger> ledgers;
        for (std::size_t p = 0; p < 16; ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 22, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            ledgers.push_back(accumulate_log_weight(field, z, w, 1));
        }
        // quad <= 0.25 * T = 0.25, far below every level.
        const std::vector<double> levels = {1.0, 2.0, 4.0};
        const std::vector<double> diffs = l1_cauchy_diagnostic(ledgers, levels);
        REQUIRE(diffs.size() == 2);
        CHECK(diffs[0] == 0.0);
        CHECK(diffs[1] == 0.0);
    }

    SUBCASE("deterministic quad between two levels") {
        const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "1"}});
        const GammaField field(spec.model);
        std::vector<LogWeightLedger> ledgers;
        for (std::size_t p = 0; p < 16; ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 23, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            ledgers.push_back(accumulate_log_weight(field, z, w, 1));
        }
        // quad = 1 for every path: levels beyond 1 are indistinguishable.
        const std::vector<double> levels = {0.5, 2.0, 4.0};
        const std::vector<double> diffs = l1_cauchy_diagnostic(ledgers, levels);
        CHECK(diffs[0] > 0.0);
        CHECK(diffs[1] == 0.0);
    }

    const std::vector<LogWeightLedger> none;
    const std::vector<double> one_level = {1.0};
    CHECK_THROWS_AS(l1_cauchy_diagnostic(none, one_level), std::invalid_argument);
}

TEST_CASE("weighted estimate hits the shifted Brownian mean") {
    const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "0.5"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));
    const std::size_t n = 20000;
    std::vector<double> terminal(n), logw(n);
    for (std::size_t p = 0; p < n; ++p) {
        const BrownianPath w = sample_brownian(grid, 1, 24, p);
        const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
        terminal[p] = z.terminal()(0);
        logw[p] = accumulate_log_weight(field, z, w, 1).total_log_weight();
    }
    const EstimatorReport report =
        estimate_from_samples(terminal, logw, EstimatorMode::SelfNormalized);
    CHECK(std::abs(report.estimate - 0.5) <= 3.0 * report.stderr_);
}

TEST_CASE("compare_direct_vs_weighted with identical drifts is pure noise") {
    const ModelSpec spec = build_sde_model("ou_shift", {{"theta", "0"}});
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 32));
    const auto functionals = standard_functionals();
    CompareOptions opts;
    opts.n_paths = 4000;
    opts.master_seed = 25;
    opts.workers = 2;
    const CompareReport report =
        compare_direct_vs_weighted(spec.model, spec.x0, functionals, grid, opts);
    CHECK(report.weighted_ess == doctest::Approx(4000.0).epsilon(1e-12));
    for (const auto& row : report.rows) {
        CHECK(std::abs(row.z_direct_vs_weighted) <= 3.0);
        CHECK(std::abs(row.z_direct_vs_direct) <= 3.0);
    }
}
