#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "girsanov/config.hpp"
#include "girsanov/errors.hpp"
#include "girsanov/estimators.hpp"
#include "girsanov/gamma_field.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/model_registry.hpp"
#include "girsanov/pseudo_inverse.hpp"
#include "girsanov/report.hpp"
#include "girsanov/runner.hpp"
#include "girsanov/spectral.hpp"
#include "girsanov/version.hpp"
#include "girsanov/weight_ledger.hpp"

namespace py = pybind11;
using namespace girsanov;

namespace {

ParamMap params_from_kwargs(const py::dict& kwargs) {
    ParamMap params;
    for (const auto& item : kwargs) {
        params[py::str(item.first).cast<std::string>()] =
            py::str(item.second).cast<std::string>();
    }
    return params;
}

struct SimulationResult {
    Eigen::MatrixXd values;      // d x nodes
    double log_weight = 0.0;
    double quad = 0.0;
};

SimulationResult simulate_impl(const std::string& model_name, const py::dict& params,
                               const std::string& drift, double t0, double horizon,
                               std::size_t n_steps, std::uint64_t seed, std::uint64_t stream,
                               bool with_weight) {
    const ModelSpec spec = build_sde_model(model_name, params_from_kwargs(params));
    const GridPtr grid = share(make_uniform_grid(t0, horizon, n_steps));
    const BrownianPath w =
        sample_brownian(grid, spec.model.noise_dimension(), seed, stream);
    const DriftSelector which = (drift == "b") ? DriftSelector::B : DriftSelector::A;
    const SamplePath path = euler_maruyama(spec.model, which, spec.x0, w);
    SimulationResult out;
    out.values = path.values();
    if (with_weight) {
        const LogWeightLedger ledger =
            accumulate_log_weight(GammaField(spec.model), path, w, 1);
        out.log_weight = ledger.total_log_weight();
        out.quad = ledger.total_quad();
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Change-of-drift simulation toolkit (C++ core)";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<RangeConditionError>(m, "RangeConditionError");

    m.def("list_models", &model_catalog, "Registry of named coefficient families");

    m.def(
        "uniform_grid_nodes",
        [](double t0, double horizon, std::size_t n_steps) {
            return make_uniform_grid(t0, horizon, n_steps).nodes();
        },
        py::arg("t0"), py::arg("T"), py::arg("n_steps"));

    m.def(
        "brownian_increments",
        [](double t0, double horizon, std::size_t n_steps, int m, std::uint64_t seed,
           std::uint64_t stream) {
            const GridPtr grid = share(make_uniform_grid(t0, horizon, n_steps));
            return Eigen::MatrixXd(sample_brownian(grid, m, seed, stream).increments());
        },
        py::arg("t0"), py::arg("T"), py::arg("n_steps"), py::arg("m"), py::arg("seed"),
        py::arg("stream"));

    m.def(
        "pseudo_inverse",
        [](const Eigen::MatrixXd& mat, py::object cutoff) {
            if (cutoff.is_none()) {
                return pseudo_inverse(mat);
            }
            return pseudo_inverse(mat, cutoff.cast<double>());
        },
        py::arg("matrix"), py::arg("cutoff") = py::none());

    m.def(
        "reduce_diffusion",
        [](const Eigen::MatrixXd& mat) {
            const ReducedDiffusion red = reduce_diffusion(mat);
            return py::make_tuple(red.tilde_sigma, red.basis_v);
        },
        py::arg("matrix"));

    m.def(
        "simulate",
        [](const std::string& model, const std::string& drift, double t0, double horizon,
           std::size_t n_steps, std::uint64_t seed, std::uint64_t stream,
           const py::kwargs& kwargs) {
            return simulate_impl(model, kwargs, drift, t0, horizon, n_steps, seed, stream,
                                 false)
                .values;
        },
        py::arg("model"), py::arg("drift"), py::arg("t0"), py::arg("T"), py::arg("n_steps"),
        py::arg("seed"), py::arg("stream"),
        "Euler path of the named model under drift 'a' or 'b'; returns d x (n_steps+1) values");

    m.def(
        "log_weight",
        [](const std::string& model, double t0, double horizon, std::size_t n_steps,
           std::uint64_t seed, std::uint64_t stream, const py::kwargs& kwargs) {
            const SimulationResult r =
                simulate_impl(model, kwargs, "a", t0, horizon, n_steps, seed, stream, true);
            return py::make_tuple(r.log_weight, r.quad);
        },
        py::arg("model"), py::arg("t0"), py::arg("T"), py::arg("n_steps"), py::arg("seed"),
        py::arg("stream"),
        "Reference path's (log weight, quadratic mass) for the named model");

    m.def(
        "effective_sample_size",
        [](const std::vector<double>& log_weights) {
            return effective_sample_size(log_weights);
        },
        py::arg("log_weights"));

    m.def(
        "self_normalized_estimate",
        [](const std::vector<double>& values, const std::vector<double>& log_weights) {
            const EstimatorReport r =
                estimate_from_samples(values, log_weights, EstimatorMode::SelfNormalized);
            return py::make_tuple(r.estimate, r.stderr_, r.ess);
        },
        py::arg("values"), py::arg("log_weights"));

    m.def(
        "martingale_mean",
        [](const std::vector<double>& log_weights) {
            const MartingaleTest t = martingale_test(log_weights);
            return py::make_tuple(t.mean, t.z_score, t.pass);
        },
        py::arg("log_weights"));

    m.def(
        "ou_exact_terminal",
        [](double lambda, double q, double horizon, std::size_t n_steps, std::uint64_t seed,
           std::uint64_t stream) {
            SpectralModel model(
                Eigen::VectorXd::Constant(1, lambda), Eigen::VectorXd::Constant(1, q),
                [](const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd> out) { out.setZero(); },
                Eigen::VectorXd::Ones(1));
            CounterRng rng(seed, stream);
            const GridPtr grid = share(make_uniform_grid(0.0, horizon, n_steps));
            return ou_exact_path(model, Eigen::VectorXd::Zero(1), grid, rng).terminal()(0);
        },
        py::arg("lam"), py::arg("q"), py::arg("T"), py::arg("n_steps"), py::arg("seed"),
        py::arg("stream"));

    m.def(
        "run_config_file",
        [](const std::string& path, py::object seed, const std::string& out_dir,
           const std::string& format, int workers) {
            auto configs = parse_config_file(path);
            py::dict result;
            for (auto& cfg : configs) {
                if (!seed.is_none()) {
                    cfg.master_seed = seed.cast<std::uint64_t>();
                }
                const RunReport report = run_experiment(cfg, {workers});
                if (!out_dir.empty()) {
                    write_report(report,
                                 format == "json" ? ReportFormat::Json : ReportFormat::Csv,
                                 out_dir);
                }
                py::list rows;
                for (const auto& row : report.rows) {
                    py::dict r;
                    r["metric"] = row.name;
                    r["value"] = row.value;
                    r["stderr"] = row.stderr_;
                    r["pass"] = row.pass;
                    rows.append(std::move(r));
                }
                py::dict section;
                section["rows"] = std::move(rows);
                section["all_pass"] = report.all_pass();
                result[py::str(cfg.section)] = std::move(section);
            }
            return result;
        },
        py::arg("path"), py::arg("seed") = py::none(), py::arg("out_dir") = std::string(),
        py::arg("format") = std::string("csv"), py::arg("workers") = 0,
        "Run every section of a config file; returns {section: {rows, all_pass}}");
}
