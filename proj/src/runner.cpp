#include "girsanov/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "girsanov/errors.hpp"
#include "girsanov/estimators.hpp"
#include "girsanov/gamma_field.hpp"
#include "girsanov/parallel.hpp"
#include "girsanov/pseudo_inverse.hpp"
#include "girsanov/rng.hpp"
#include "girsanov/spectral.hpp"
#include "girsanov/version.hpp"
#include "girsanov/weight_ledger.hpp"

namespace girsanov {

namespace {

constexpr double kZMax = 3.0;
constexpr double kPinvTol = 1e-10;
constexpr double kGlueTol = 1e-12;

// Stream-id layout: path index in the low 40 bits, run tag above, so the
// runs of one experiment never share a stream.
std::uint64_t stream_of(std::uint64_t tag, std::size_t path) {
    return static_cast<std::uint64_t>(path) | (tag << 40);
}

std::string level_label(double n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", n);
    return buf;
}

void add_row(RunReport& report, const std::string& name, double value, double stderr_ = 0.0,
             bool pass = true) {
    report.rows.push_back({name, value, stderr_, pass});
}

struct WeightsEnsembleResult {
    std::vector<double> log_weights;
    std::vector<double> quads;
    std::vector<std::vector<double>> truncated_log_by_level;  // [level][path]
};

WeightsEnsembleResult stream_weight_ensemble(const ModelSpec& spec, const GridPtr& grid,
                                             std::size_t n_paths, std::uint64_t master_seed,
                                             std::uint64_t tag,
                                             const std::vector<double>& levels, int workers) {
    WeightsEnsembleResult out;
    out.log_weights.resize(n_paths);
    out.quads.resize(n_paths);
    out.truncated_log_by_level.assign(levels.size(), std::vector<double>(n_paths));
    const GammaField field(spec.model);
    parallel_for_index(n_paths, workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(grid, spec.model.noise_dimension(), master_seed,
                                               stream_of(tag, i));
        const SamplePath z = euler_maruyama(spec.model, DriftSelector::A, spec.x0, w);
        const LogWeightLedger ledger = accumulate_log_weight(field, z, w, 1);
        out.log_weights[i] = ledger.total_log_weight();
        out.quads[i] = ledger.total_quad();
        for (std::size_t j = 0; j < levels.size(); ++j) {
            out.truncated_log_by_level[j][i] =
                truncated_log_weight(ledger, truncation_state(ledger, levels[j]));
        }
    });
    return out;
}

void run_weights(const ExperimentConfig& cfg, RunReport& report, int workers) {
    const ModelSpec spec = build_sde_model(cfg.model, cfg.params);
    const GridPtr grid = share(make_uniform_grid(cfg.t0, cfg.horizon, cfg.n_steps));
    const auto ens = stream_weight_ensemble(spec, grid, cfg.paths, cfg.master_seed, 0,
                                            cfg.levels, workers);

    const MartingaleTest mart = martingale_test(ens.log_weights);
    add_row(report, "mean_weight", mart.mean, mart.stderr_, mart.pass);
    add_row(report, "martingale_z", mart.z_score, 0.0, mart.pass);
    add_row(report, "ess", effective_sample_size(ens.log_weights));
    const NovikovReport nov = novikov_report(ens.quads);
    add_row(report, "sup_quad", nov.sup_quad);
    add_row(report, "mean_exp_half_quad", nov.mean_exp_half_quad);

    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        const std::string label = level_label(cfg.levels[j]);
        const MartingaleTest mt = martingale_test(ens.truncated_log_by_level[j]);
        add_row(report, "mean_weight_n" + label, mt.mean, mt.stderr_, mt.pass);
        std::size_t truncated = 0;
        for (double q : ens.quads) {
            if (q >= cfg.levels[j]) {
                ++truncated;
            }
        }
        add_row(report, "truncated_fraction_n" + label,
                static_cast<double>(truncated) / static_cast<double>(cfg.paths));
    }
}

void run_compare(const ExperimentConfig& cfg, RunReport& report, int workers) {
    const ModelSpec spec = build_sde_model(cfg.model, cfg.params);
    const GridPtr grid = share(make_uniform_grid(cfg.t0, cfg.horizon, cfg.n_steps));
    const auto functionals = standard_functionals();
    CompareOptions opts;
    opts.n_paths = cfg.paths;
    opts.master_seed = cfg.master_seed;
    opts.workers = workers;
    const CompareReport cmp =
        compare_direct_vs_weighted(spec.model, spec.x0, functionals, grid, opts);
    for (const auto& row : cmp.rows) {
        add_row(report, "direct_" + row.functional, row.direct_mean, row.direct_stderr);
        add_row(report, "direct2_" + row.functional, row.direct2_mean, row.direct2_stderr);
        add_row(report, "weighted_" + row.functional, row.weighted_mean, row.weighted_stderr);
        add_row(report, "z_weighted_" + row.functional, row.z_direct_vs_weighted, 0.0,
                std::abs(row.z_direct_vs_weighted) <= kZMax);
        add_row(report, "z_direct_pair_" + row.functional, row.z_direct_vs_direct, 0.0,
                std::abs(row.z_direct_vs_direct) <= kZMax);
    }
    add_row(report, "weighted_ess", cmp.weighted_ess);
}

void run_truncation(const ExperimentConfig& cfg, RunReport& report, int workers) {
    if (cfg.levels.size() < 2) {
        throw ConfigError("truncation experiments need at least two levels", "levels");
    }
    const ModelSpec spec = build_sde_model(cfg.model, cfg.params);
    const GridPtr grid = share(make_uniform_grid(cfg.t0, cfg.horizon, cfg.n_steps));
    const GammaField field(spec.model);

    const double decay_level = cfg.levels.front();
    struct DecaySlot {
        bool on_event = false;
        double rho = 0.0;
    };
    std::vector<DecaySlot> decay(cfg.paths);

    // The ensemble is simulated under the target drift b: the crossing of
    // the level happens on the paths whose law the truncation argument
    // glues back together.
    std::vector<double> quads(cfg.paths);
    std::vector<std::vector<double>> trunc_log(cfg.levels.size(),
                                               std::vector<double>(cfg.paths));
    parallel_for_index(cfg.paths, workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(grid, spec.model.noise_dimension(),
                                               cfg.master_seed, stream_of(4, i));
        const SamplePath x = euler_maruyama(spec.model, DriftSelector::B, spec.x0, w);
        const LogWeightLedger ledger = accumulate_log_weight(field, x, w, 1);
        quads[i] = ledger.total_quad();
        for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
            trunc_log[j][i] = truncated_log_weight(ledger, truncation_state(ledger, cfg.levels[j]));
        }
        if (ledger.total_quad() >= decay_level) {
            const TruncationState state = truncation_state(ledger, decay_level);
            KahanSum stoch;
            for (std::size_t s = 0; s < ledger.step_count(); ++s) {
                if (state.chi[s + 1] == 0) {
                    break;
                }
                stoch.add(ledger.stoch_increment(s));
            }
            if (stoch.value() <= 0.25 * decay_level) {
                decay[i].on_event = true;
                decay[i].rho = std::exp(truncated_log_weight(ledger, state));
            }
        }
    });

    bool fractions_monotone = true;
    double previous = 2.0;
    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        std::size_t truncated = 0;
        for (double q : quads) {
            if (q >= cfg.levels[j]) {
                ++truncated;
            }
        }
        const double fraction = static_cast<double>(truncated) / static_cast<double>(cfg.paths);
        fractions_monotone = fractions_monotone && fraction <= previous;
        previous = fraction;
        add_row(report, "truncated_fraction_n" + level_label(cfg.levels[j]), fraction);
    }
    add_row(report, "fractions_monotone", fractions_monotone ? 1.0 : 0.0, 0.0,
            fractions_monotone);

    const std::vector<double> diffs = l1_cauchy_from_truncated(trunc_log);
    bool l1_monotone = true;
    for (std::size_t j = 0; j < diffs.size(); ++j) {
        add_row(report,
                "l1_diff_n" + level_label(cfg.levels[j]) + "_n" + level_label(cfg.levels[j + 1]),
                diffs[j]);
        if (j > 0) {
            l1_monotone = l1_monotone && diffs[j] <= diffs[j - 1] + 1e-15;
        }
    }
    add_row(report, "l1_monotone", l1_monotone ? 1.0 : 0.0, 0.0, l1_monotone);

    std::size_t event_count = 0;
    double max_rho = 0.0;
    for (const auto& slot : decay) {
        if (slot.on_event) {
            ++event_count;
            max_rho = std::max(max_rho, slot.rho);
        }
    }
    add_row(report, "decay_event_fraction",
            static_cast<double>(event_count) / static_cast<double>(cfg.paths));
    add_row(report, "decay_max_rho", max_rho);
    add_row(report, "decay_reference_bound", std::exp(-0.25 * decay_level));

    // Glued truncated solution against the exact restart on one crossing
    // path; exact agreement is the contract.
    if (!spec.linear_a) {
        throw ConfigError("truncation glue check needs a model with linear reference drift",
                          "model");
    }
    const BrownianPath w = sample_brownian(grid, spec.model.noise_dimension(), cfg.master_seed,
                                           stream_of(5, 0));
    const SamplePath x = euler_maruyama(spec.model, DriftSelector::B, spec.x0, w);
    const LogWeightLedger glue_ledger = accumulate_log_weight(field, x, w, 1);
    double glue_err = 0.0;
    if (glue_ledger.total_quad() > 0.0) {
        const double n_glue = 0.5 * glue_ledger.total_quad();
        const RestartMap restart = make_linear_restart(spec.linear_a->c, spec.linear_a->sigma);
        const SamplePath glued = pathwise_truncated_solution(field, x, w, n_glue, restart);
        const TruncationState state = truncation_state(glue_ledger, n_glue);
        const SamplePath oracle_tail = exact_linear_solution(
            spec.linear_a->c, spec.linear_a->sigma, grid->node(state.tau_index),
            x.at(state.tau_index), w);
        for (std::size_t k = 0; k < grid->node_count(); ++k) {
            const Eigen::VectorXd expected =
                (k <= state.tau_index) ? Eigen::VectorXd(x.at(k))
                                       : Eigen::VectorXd(oracle_tail.at(k - state.tau_index));
            glue_err = std::max(glue_err, (glued.at(k) - expected).cwiseAbs().maxCoeff());
        }
    }
    add_row(report, "glue_max_error", glue_err, 0.0, glue_err <= kGlueTol);
}

void run_galerkin(const ExperimentConfig& cfg, RunReport& report, int workers) {
    const SpectralModel model = build_spectral_model(cfg.params);
    const Eigen::VectorXd x0 = spectral_x0(cfg.params);
    const GridPtr grid = share(make_uniform_grid(cfg.t0, cfg.horizon, cfg.n_steps));

    // Stationary variance of the first mode: exact transitions over a long
    // horizon, one sample per path.
    {
        const double lambda1 = model.lambda()(0);
        const double q1 = model.q()(0);
        SpectralModel single(Eigen::VectorXd::Constant(1, lambda1),
                             Eigen::VectorXd::Constant(1, q1),
                             [](const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd> out) {
                                 out.setZero();
                             },
                             Eigen::VectorXd::Constant(1, 1.0));
        const GridPtr var_grid = share(make_uniform_grid(0.0, 8.0 / lambda1, 16));
        const OuTransition transition(single, var_grid);
        std::vector<double> terminal(cfg.paths);
        parallel_for_index(cfg.paths, workers, [&](std::size_t i) {
            CounterRng rng(cfg.master_seed, stream_of(6, i));
            terminal[i] = transition.sample(Eigen::VectorXd::Zero(1), rng).terminal()(0);
        });
        KahanSum sum;
        for (double v : terminal) {
            sum.add(v);
        }
        const double nd = static_cast<double>(cfg.paths);
        const double mean = sum.value() / nd;
        KahanSum ss;
        for (double v : terminal) {
            ss.add((v - mean) * (v - mean));
        }
        const double variance = ss.value() / (nd - 1.0);
        const double stderr_var = variance * std::sqrt(2.0 / (nd - 1.0));
        const double target = q1 / (2.0 * lambda1);
        const bool pass = std::abs(variance - target) <= 4.0 * stderr_var;
        add_row(report, "mode1_variance", variance, stderr_var, pass);
        add_row(report, "mode1_variance_target", target);
    }

    const auto functionals = standard_functionals();
    const SemilinearReport sem = semilinear_equivalence_experiment(
        model, functionals, grid, x0, cfg.paths, cfg.master_seed, workers);
    for (const auto& row : sem.rows) {
        add_row(report, "weighted_" + row.functional, row.weighted_mean, row.weighted_stderr);
        add_row(report, "direct_" + row.functional, row.direct_mean, row.direct_stderr);
        add_row(report, "z_" + row.functional, row.z, 0.0, std::abs(row.z) <= kZMax);
    }
    add_row(report, "sup_quad", sem.sup_quad);
    add_row(report, "max_e_norm_sq", sem.max_e_norm_sq);
    add_row(report, "weighted_ess", sem.weighted_ess);

    // The range condition must reject a nonlinearity that pushes a dead
    // mode.
    bool raised = false;
    try {
        SpectralModel bad(Eigen::VectorXd::Constant(2, 1.0),
                          (Eigen::VectorXd(2) << 1.0, 0.0).finished(),
                          [](const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
                              out(0) = y(0);
                              out(1) = 0.1;
                          },
                          Eigen::VectorXd::Constant(2, 1.0));
        (void)gamma_from_nonlinearity(bad, Eigen::VectorXd::Zero(2));
    } catch (const RangeConditionError&) {
        raised = true;
    }
    add_row(report, "a4_violation_raises", raised ? 1.0 : 0.0, 0.0, raised);

    // Noise-free-density feasibility diagnostic: grows with the mode count
    // whenever lambda_k / sqrt(q_k) does. Demonstrative, never a gate.
    if ((model.q().array() > 0.0).all()) {
        const auto mean_condition = [&](const SpectralModel& m, std::uint64_t tag) {
            const Eigen::VectorXd start = Eigen::VectorXd::Zero(m.mode_count());
            const OuTransition transition(m, grid);
            KahanSum acc;
            const std::size_t probes = 8;
            for (std::size_t p = 0; p < probes; ++p) {
                CounterRng rng(cfg.master_seed, stream_of(tag, p));
                acc.add(noise_free_feasibility_quad(m, transition.sample(start, rng)));
            }
            return acc.value() / static_cast<double>(probes);
        };
        add_row(report, "noise_free_feasibility_quad", mean_condition(model, 7));
        ParamMap doubled = cfg.params;
        doubled["N"] = std::to_string(2 * model.mode_count());
        add_row(report, "noise_free_feasibility_quad_2N", mean_condition(build_spectral_model(doubled), 8));
    }
}

Eigen::MatrixXd random_orthonormal(int rows, int cols, CounterRng& rng) {
    Eigen::MatrixXd g(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            g(i, j) = rng.next_normal();
        }
    }
    return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
           Eigen::MatrixXd::Identity(rows, cols);
}

void run_pseudoinverse(const ExperimentConfig& cfg, RunReport& report, int /*workers*/) {
    const long count = param_as_long(cfg.params, "count", 200);
    const long max_dim = param_as_long(cfg.params, "size", 8);
    if (count < 1 || max_dim < 1) {
        throw ConfigError("count and size must be positive", "count");
    }
    CounterRng rng(cfg.master_seed, stream_of(8, 0));

    double penrose[4] = {0.0, 0.0, 0.0, 0.0};
    double closed_left = 0.0, closed_right = 0.0, norm_inv = 0.0;
    for (long trial = 0; trial < count; ++trial) {
        const int d = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_dim));
        const int m = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_dim));
        // Alternate raw Gaussian entries (any conditioning; the SVD route is
        // backward stable, so the Penrose residuals stay tiny) with
        // spectrum-controlled factors, on which the normal-equation closed
        // forms and the reduced-diffusion norm identity are well posed.
        const bool constructed = (trial % 2 == 1);
        const bool deficient = constructed && (trial % 4 == 3) && std::min(d, m) > 1;
        Eigen::MatrixXd mat(d, m);
        if (constructed) {
            const int full = std::min(d, m);
            const int r =
                deficient
                    ? 1 + static_cast<int>(rng.next_u64() %
                                           static_cast<std::uint64_t>(full - 1))
                    : full;
            const Eigen::MatrixXd u = random_orthonormal(d, r, rng);
            const Eigen::MatrixXd v = random_orthonormal(m, r, rng);
            Eigen::VectorXd sv(r);
            for (int j = 0; j < r; ++j) {
                sv(j) = 0.5 + 1.5 * rng.next_uniform();  // spectrum in [0.5, 2)
            }
            mat = u * sv.asDiagonal() * v.transpose();
        } else {
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < m; ++j) {
                    mat(i, j) = rng.next_normal();
                }
            }
        }

        const Eigen::MatrixXd pinv = pseudo_inverse(mat);
        const double scale = std::max(1.0, mat.norm());
        const double pscale = std::max(1.0, pinv.norm());
        penrose[0] = std::max(penrose[0], (mat * pinv * mat - mat).norm() / scale);
        penrose[1] = std::max(penrose[1], (pinv * mat * pinv - pinv).norm() / pscale);
        const Eigen::MatrixXd mp = mat * pinv;
        const Eigen::MatrixXd pm = pinv * mat;
        penrose[2] = std::max(penrose[2], (mp - mp.transpose()).norm());
        penrose[3] = std::max(penrose[3], (pm - pm.transpose()).norm());

        if (constructed && !deficient) {
            if (d >= m) {
                const Eigen::MatrixXd closed =
                    (mat.transpose() * mat).inverse() * mat.transpose();
                closed_right = std::max(closed_right, (pinv - closed).norm() / pscale);
            }
            if (m >= d) {
                const Eigen::MatrixXd closed =
                    mat.transpose() * (mat * mat.transpose()).inverse();
                closed_left = std::max(closed_left, (pinv - closed).norm() / pscale);
            }
        }

        if (constructed) {
            // Norm invariance on a consistent right-hand side.
            Eigen::VectorXd coeffs(m);
            for (int j = 0; j < m; ++j) {
                coeffs(j) = rng.next_normal();
            }
            const Eigen::VectorXd rhs = mat * coeffs;
            const ReducedDiffusion reduced = reduce_diffusion(mat);
            const Eigen::MatrixXd tilde_pinv = pseudo_inverse(reduced.tilde_sigma);
            const double direct = (pinv * rhs).norm();
            const double via_tilde = (tilde_pinv * rhs).norm();
            norm_inv = std::max(norm_inv,
                                std::abs(direct - via_tilde) / std::max(1.0, std::abs(direct)));
        }
    }

    add_row(report, "matrices_checked", static_cast<double>(count));
    add_row(report, "penrose_max_1", penrose[0], 0.0, penrose[0] <= kPinvTol);
    add_row(report, "penrose_max_2", penrose[1], 0.0, penrose[1] <= kPinvTol);
    add_row(report, "penrose_max_3", penrose[2], 0.0, penrose[2] <= kPinvTol);
    add_row(report, "penrose_max_4", penrose[3], 0.0, penrose[3] <= kPinvTol);
    add_row(report, "closed_form_left_max", closed_left, 0.0, closed_left <= kPinvTol);
    add_row(report, "closed_form_right_max", closed_right, 0.0, closed_right <= kPinvTol);
    add_row(report, "norm_invariance_max", norm_inv, 0.0, norm_inv <= kPinvTol);
}

}  // namespace

int resolve_worker_count(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("GIRSANOV_LAB_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) {
            return parsed;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    const int workers = resolve_worker_count(opts.workers);
    RunReport report;
    report.section = cfg.section;
    report.config_echo = cfg.echo;
    report.version = kVersion;
    const auto start = std::chrono::steady_clock::now();
    if (cfg.kind == "weights") {
        run_weights(cfg, report, workers);
    } else if (cfg.kind == "compare") {
        run_compare(cfg, report, workers);
    } else if (cfg.kind == "truncation") {
        run_truncation(cfg, report, workers);
    } else if (cfg.kind == "galerkin") {
        run_galerkin(cfg, report, workers);
    } else if (cfg.kind == "pseudoinverse") {
        run_pseudoinverse(cfg, report, workers);
    } else {
        throw ConfigError("unknown kind '" + cfg.kind + "'", "kind");
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace girsanov
