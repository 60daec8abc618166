#include <doctest.h>

#include <cmath>

#include "girsanov/errors.hpp"
#include "girsanov/estimators.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/model_registry.hpp"
#include "girsanov/weight_ledger.hpp"

using namespace girsanov;

namespace {

// Hand-built ledger on a uniform grid; the oracle for truncation logic.
LogWeightLedger manual_ledger(std::vector<double> stoch, std::vector<double> quad) {
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, stoch.size()));
    return LogWeightLedger(grid, std::move(stoch), std::move(quad), 1);
}

}  // namespace

TEST_CASE("zero drift change gives unit weight") {
    const ModelSpec spec = build_sde_model("ou_shift", {{"theta", "0"}});
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 32));
    const BrownianPath w = sample_brownian(grid, 1, 1, 0);
    const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
    const LogWeightLedger ledger = accumulate_log_weight(GammaField(spec.model), z, w, 1);
    for (std::size_t k = 0; k < grid->node_count(); ++k) {
        CHECK(ledger.log_weight_at(k) == 0.0);
    }
    CHECK(std::exp(ledger.total_log_weight()) == 1.0);
}

TEST_CASE("constant gamma reproduces the closed-form log-weight") {
    const double theta = 0.8;
    const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "0.8"}});
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 128));
    const BrownianPath w = sample_brownian(grid, 1, 2, 5);
    const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
    const LogWeightLedger ledger = accumulate_log_weight(GammaField(spec.model), z, w, 1);

    // Independent oracle: theta * W(T) - theta^2 T / 2 summed directly.
    double wt = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < grid->step_count(); ++i) {
        wt += w.increments()(0, i);
        quad += theta * theta * grid->dt(i);
    }
    CHECK(ledger.total_log_weight() ==
          doctest::Approx(theta * wt - 0.5 * quad).epsilon(1e-13));
    CHECK(ledger.total_quad() == doctest::Approx(theta * theta).epsilon(1e-13));
}

TEST_CASE("inconsistent gamma raises a model error with the node") {
    // sigma = 0 while b - a = 1: no gamma can connect the drifts.
    CoefficientModel model(
        1, 1,
        [](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) { out(0) = 0.0; },
        [](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) { out(0) = 1.0; },
        [](double, const PathView&, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = 0.0; });
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 4));
    const BrownianPath w = sample_brownian(grid, 1, 3, 0);
    const SamplePath z = euler_maruyama(model, DriftSelector::A, Eigen::VectorXd::Zero(1), w);
    CHECK_THROWS_AS(accumulate_log_weight(GammaField(model), z, w, 1), ModelError);
}

TEST_CASE("truncation_state follows the definitions") {
    SUBCASE("never truncated") {
        const LogWeightLedger ledger = manual_ledger({0.1, -0.2, 0.05, 0.0},
                                                     {0.125, 0.125, 0.125, 0.125});
        const TruncationState state = truncation_state(ledger, 1.0);
        CHECK(state.tau_index == 4);
        CHECK_FALSE(state.truncated());
        for (auto c : state.chi) {
            CHECK(c == 1);
        }
        CHECK(truncated_log_weight(ledger, state) == ledger.total_log_weight());
    }

    SUBCASE("crossing with a tie truncates at the tie") {
        const LogWeightLedger ledger = manual_ledger({0.1, 0.2, -0.3, 0.4},
                                                     {0.3, 0.3, 0.3, 0.3});
        const TruncationState state = truncation_state(ledger, 0.6);
        CHECK(state.tau_index == 2);  // cumulative quad hits 0.6 exactly there
        CHECK(state.chi[0] == 1);
        CHECK(state.chi[1] == 1);
        CHECK(state.chi[2] == 0);
        CHECK(state.chi[3] == 0);
        CHECK(state.chi[4] == 0);
        // Only the first step's right endpoint stays strictly below the
        // level.
        CHECK(truncated_log_weight(ledger, state) ==
              doctest::Approx(0.1 - 0.15).epsilon(1e-15));
        CHECK(state.truncated());
    }

    SUBCASE("vanishing level keeps nothing") {
        const LogWeightLedger ledger = manual_ledger({0.5, 0.5}, {0.4, 0.4});
        const TruncationState state = truncation_state(ledger, 1e-12);
        CHECK(truncated_log_weight(ledger, state) == 0.0);
    }

    SUBCASE("monotone in the level") {
        const LogWeightLedger ledger = manual_ledger({0.0, 0.0, 0.0, 0.0},
                                                     {0.1, 0.4, 0.2, 0.3});
        const TruncationState s1 = truncation_state(ledger, 0.3);
        const TruncationState s2 = truncation_state(ledger, 0.8);
        CHECK(s1.tau_index <= s2.tau_index);
        for (std::size_t k = 0; k < s1.chi.size(); ++k) {
            CHECK(s1.chi[k] <= s2.chi[k]);
        }
        // chi is non-increasing along the path.
        for (std::size_t k = 0; k + 1 < s1.chi.size(); ++k) {
            CHECK(s1.chi[k] >= s1.chi[k + 1]);
        }
        // The kept quadratic mass never exceeds the level.
        double kept = 0.0;
        for (std::size_t i = 0; i < ledger.step_count(); ++i) {
            if (s1.chi[i + 1] == 1) {
                kept += ledger.quad_increment(i);
            }
        }
        CHECK(kept <= 0.3);
    }

    CHECK_THROWS_AS(truncation_state(manual_ledger({0.0}, {0.1}), 0.0), std::invalid_argument);
}

TEST_CASE("drift shift: definition and re-integration identity") {
    const ModelSpec spec = build_sde_model("ou_shift", {{"lambda", "1"}, {"theta", "1"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 256));
    const BrownianPath w = sample_brownian(grid, 1, 4, 9);
    const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
    const BrownianPath w_star = apply_drift_shift(w, field, z);

    // gamma is the constant theta = 1 here.
    for (std::size_t i = 0; i < grid->step_count(); ++i) {
        CHECK(w_star.increments()(0, i) ==
              doctest::Approx(w.increments()(0, i) - grid->dt(i)).epsilon(1e-15));
    }

    // Z solves the b-drift equation driven by W* on the grid.
    const SamplePath re = euler_maruyama(spec.model, DriftSelector::B, spec.x0, w_star);
    double sup = 0.0;
    for (std::size_t k = 0; k < grid->node_count(); ++k) {
        sup = std::max(sup, std::abs(re.scalar_at(k) - z.scalar_at(k)));
    }
    CHECK(sup <= 1e-10);

    SUBCASE("no shift when the drifts coincide") {
        const ModelSpec same = build_sde_model("ou_shift", {{"theta", "0"}});
        const SamplePath z0 = euler_maruyama(same.model, DriftSelector::A, same.x0, w);
        const BrownianPath unchanged = apply_drift_shift(w, GammaField(same.model), z0);
        CHECK(unchanged.increments() == w.increments());
    }
}

TEST_CASE("two-sided identity holds per path to near machine precision") {
    const ModelSpec spec =
        build_sde_model("path_dependent", {{"lambda", "1"}, {"scale", "1.3"}, {"x0", "0.7"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 256));
    for (std::size_t p = 0; p < 50; ++p) {
        const BrownianPath w = sample_brownian(grid, 1, 5, p);
        const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
        const LogWeightLedger forward = accumulate_log_weight(field, z, w, 1);
        const BrownianPath w_star = apply_drift_shift(w, field, z);
        const LogWeightLedger reverse = accumulate_log_weight(field, z, w_star, -1);
        const TwoSidedReport report = reverse_log_weight(forward, reverse);
        CHECK(report.relative_discrepancy <= 1e-12);
    }
}

TEST_CASE("noise-free density form agrees with the ledger") {
    SUBCASE("trivial and substitution cases") {
        const ModelSpec same = build_sde_model("ou_shift", {{"theta", "0"}});
        const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));
        const BrownianPath w = sample_brownian(grid, 1, 6, 0);
        const SamplePath z = euler_maruyama(same.model, DriftSelector::A, same.x0, w);
        CHECK(noise_free_log_weight(same.model, z) == 0.0);

        const double theta = 0.6;
        const ModelSpec shift = build_sde_model("brownian_shift", {{"theta", "0.6"}});
        const SamplePath zb = euler_maruyama(shift.model, DriftSelector::A, shift.x0, w);
        double wt = 0.0;
        for (std::size_t i = 0; i < grid->step_count(); ++i) {
            wt += w.increments()(0, i);
        }
        CHECK(noise_free_log_weight(shift.model, zb) ==
              doctest::Approx(theta * wt - 0.5 * theta * theta).epsilon(1e-12));
    }

    SUBCASE("scalar model with state-dependent drift") {
        const ModelSpec spec = build_sde_model("ou_shift", {{"lambda", "1"}, {"theta", "1"}});
        const GammaField field(spec.model);
        const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 256));
        for (std::size_t p = 0; p < 20; ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 7, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            const double from_w = accumulate_log_weight(field, z, w, 1).total_log_weight();
            const double from_z = noise_free_log_weight(spec.model, z);
            const double scale = std::max({1.0, std::abs(from_w), std::abs(from_z)});
            CHECK(std::abs(from_w - from_z) / scale <= 1e-12);
        }
    }

    SUBCASE("matrix model with invertible sigma") {
        Eigen::MatrixXd sigma(2, 2);
        sigma << 1.0, 0.3, 0.0, 0.8;
        Eigen::VectorXd gap(2);
        gap << 1.0, 0.5;
        CoefficientModel model(
            2, 2,
            [](double, const PathView& y, Eigen::Ref<Eigen::VectorXd> out) {
                out = -y.current();
            },
            [gap](double, const PathView& y, Eigen::Ref<Eigen::VectorXd> out) {
                out = -y.current() + gap;
            },
            [sigma](double, const PathView&, Eigen::Ref<Eigen::MatrixXd> out) { out = sigma; });
        const GammaField field(model);
        const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 256));
        for (std::size_t p = 0; p < 20; ++p) {
            const BrownianPath w = sample_brownian(grid, 2, 8, p);
            const SamplePath z =
                euler_maruyama(model, DriftSelector::A, Eigen::VectorXd::Zero(2), w);
            const double from_w = accumulate_log_weight(field, z, w, 1).total_log_weight();
            const double from_z = noise_free_log_weight(model, z);
            const double scale = std::max({1.0, std::abs(from_w), std::abs(from_z)});
            CHECK(std::abs(from_w - from_z) / scale <= 1e-12);
        }
    }
}

TEST_CASE("reverse weights on the target simulation average to one") {
    // Simulate X under drift b and accumulate the reverse exponent; its
    // mean is 1 as well.
    const ModelSpec spec = build_sde_model("ou_shift", {{"lambda", "1"}, {"theta", "1"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 128));
    const std::size_t n = 20000;
    std::vector<double> log_weights(n);
    for (std::size_t p = 0; p < n; ++p) {
        const BrownianPath w = sample_brownian(grid, 1, 9, p);
        const SamplePath x = euler_maruyama(spec.model, DriftSelector::B, spec.x0, w);
        log_weights[p] = accumulate_log_weight(field, x, w, -1).total_log_weight();
    }
    CHECK(martingale_test(log_weights).pass);
}

TEST_CASE("novikov_report") {
    SUBCASE("constant gamma") {
        const double theta = 1.2;
        const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "1.2"}});
        const GammaField field(spec.model);
        const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));
        std::vector<LogWeightLedger> ledgers;
        for (std::size_t p = 0; p < 4; ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 10, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            ledgers.push_back(accumulate_log_weight(field, z, w, 1));
        }
        const NovikovReport report = novikov_report(ledgers);
        CHECK(report.sup_quad == doctest::Approx(theta * theta).epsilon(1e-12));
        CHECK(report.mean_exp_half_quad ==
              doctest::Approx(std::exp(0.5 * theta * theta)).epsilon(1e-12));
    }

    SUBCASE("bounded gamma bounds the quad") {
        const double bound = 0.9;
        const ModelSpec spec = build_sde_model("path_dependent", {{"scale", "0.9"}});
        const GammaField field(spec.model);
        const GridPtr grid = share(make_uniform_grid(0.0, 2.0, 64));
        std::vector<double> quads;
        for (std::size_t p = 0; p < 32; ++p) {
            const BrownianPath w = sample_brownian(grid, 1, 11, p);
            const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
            quads.push_back(accumulate_log_weight(field, z, w, 1).total_quad());
        }
        const NovikovReport report = novikov_report(quads);
        CHECK(report.sup_quad <= bound * bound * 2.0 + 1e-12);
    }
}

TEST_CASE("truncation decay surrogate") {
    const double level = 4.0;
    const ModelSpec spec = build_sde_model("brownian_shift", {{"theta", "3"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));
    std::vector<LogWeightLedger> ledgers;
    for (std::size_t p = 0; p < 400; ++p) {
        const BrownianPath w = sample_brownian(grid, 1, 12, p);
        const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
        ledgers.push_back(accumulate_log_weight(field, z, w, 1));
    }
    const TruncationDecayReport report = truncation_decay_report(ledgers, level);
    // quad = 9 > 4 on every path, so the event only needs a small
    // stochastic part.
    CHECK(report.event_count > 0);
    CHECK(report.reference_bound == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    // Structural bound: log rho^n <= n/4 - (n - max step quad)/2.
    const double max_step = 9.0 * grid->dt(0);
    CHECK(report.max_rho_on_event <=
          std::exp(0.25 * level - 0.5 * (level - max_step)) + 1e-12);
}

TEST_CASE("pathwise truncated solution") {
    const ModelSpec spec = build_sde_model("ou_shift", {{"lambda", "1"}, {"theta", "2"}});
    const GammaField field(spec.model);
    const GridPtr grid = share(make_uniform_grid(0.0, 1.0, 64));
    const RestartMap restart = make_linear_restart(spec.linear_a->c, spec.linear_a->sigma);
    const BrownianPath w = sample_brownian(grid, 1, 13, 0);
    const SamplePath x = euler_maruyama(spec.model, DriftSelector::B, spec.x0, w);

    SUBCASE("huge level leaves the path untouched") {
        const SamplePath same = pathwise_truncated_solution(field, x, w, 1e9, restart);
        CHECK(same.values() == x.values());
    }

    SUBCASE("crossing mid-grid glues the exact restart") {
        // gamma = 2, so the quad mass is 4t and crosses 2 at t = 1/2.
        const double level = 2.0;
        const SamplePath glued = pathwise_truncated_solution(field, x, w, level, restart);
        const LogWeightLedger ledger = accumulate_log_weight(field, x, w, 1);
        const TruncationState state = truncation_state(ledger, level);
        CHECK(grid->node(state.tau_index) == doctest::Approx(0.5).epsilon(1e-12));

        const SamplePath oracle = exact_linear_solution(
            spec.linear_a->c, spec.linear_a->sigma, grid->node(state.tau_index),
            x.at(state.tau_index), w);
        for (std::size_t k = 0; k < grid->node_count(); ++k) {
            if (k <= state.tau_index) {
                CHECK(glued.scalar_at(k) == x.scalar_at(k));
            } else {
                CHECK(glued.scalar_at(k) == oracle.scalar_at(k - state.tau_index));
            }
        }
        // The glued path and the original differ only beyond the crossing.
        double head_diff = 0.0;
        for (std::size_t k = 0; k <= state.tau_index; ++k) {
            head_diff = std::max(head_diff, std::abs(glued.scalar_at(k) - x.scalar_at(k)));
        }
        CHECK(head_diff == 0.0);
    }

    SUBCASE("sup-distance positive only on truncated paths") {
        const double level = 3.0;  // quad is 4T = 4, so crossing at t = 3/4
        std::size_t truncated_count = 0;
        for (std::size_t p = 0; p < 64; ++p) {
            const BrownianPath wp = sample_brownian(grid, 1, 14, p);
            const SamplePath xp = euler_maruyama(spec.model, DriftSelector::B, spec.x0, wp);
            const LogWeightLedger ledger = accumulate_log_weight(field, xp, wp, 1);
            const TruncationState state = truncation_state(ledger, level);
            const SamplePath glued = pathwise_truncated_solution(field, xp, wp, level, restart);
            double sup = 0.0;
            for (std::size_t k = 0; k < grid->node_count(); ++k) {
                sup = std::max(sup, std::abs(glued.scalar_at(k) - xp.scalar_at(k)));
            }
            if (state.truncated()) {
                ++truncated_count;
            } else {
                CHECK(sup == 0.0);
            }
        }
        CHECK(truncated_count == 64);  // deterministic quad crosses 3 < 4 always
    }

    SUBCASE("euler restart approaches the exact restart as dt shrinks") {
        const GridPtr fine = share(make_uniform_grid(0.0, 1.0, 4096));
        const BrownianPath wf = sample_brownian(fine, 1, 15, 0);
        const SamplePath xf = euler_maruyama(spec.model, DriftSelector::B, spec.x0, wf);
        const SamplePath glued_exact =
            pathwise_truncated_solution(field, xf, wf, 2.0, restart);
        const SamplePath glued_euler = pathwise_truncated_solution(
            field, xf, wf, 2.0, make_euler_restart(spec.model));
        double sup = 0.0;
        for (std::size_t k = 0; k < fine->node_count(); ++k) {
            sup = std::max(sup, std::abs(glued_exact.scalar_at(k) - glued_euler.scalar_at(k)));
        }
        CHECK(sup <= 5e-3);
    }

    SUBCASE("path-dependent diffusion is rejected") {
        CoefficientModel bad(
            1, 1,
            [](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) { out(0) = 0.0; },
            [](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) { out(0) = 1.0; },
            [](double, const PathView& y, Eigen::Ref<Eigen::MatrixXd> out) {
                out(0, 0) = 1.0 + 0.1 * y.scalar(y.node());
            });
        const SamplePath z = euler_maruyama(bad, DriftSelector::A, Eigen::VectorXd::Zero(1), w);
        CHECK_THROWS_AS(
            pathwise_truncated_solution(GammaField(bad), z, w, 1.0, restart),
            UnsupportedModelError);
    }
}
