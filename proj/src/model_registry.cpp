#include "girsanov/model_registry.hpp"

#include <cmath>
#include <stdexcept>

#include "girsanov/errors.hpp"
#include "girsanov/rng.hpp"

namespace girsanov {

double param_as_double(const ParamMap& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + it->second + "'", key);
    }
}

long param_as_long(const ParamMap& params, const std::string& key, long fallback) {
    const auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + it->second + "'", key);
    }
}

std::string param_as_string(const ParamMap& params, const std::string& key,
                            const std::string& fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

namespace {

double prefix_mean(const PathView& y) {
    double sum = 0.0;
    for (std::size_t j = 0; j <= y.node(); ++j) {
        sum += y.scalar(j);
    }
    return sum / static_cast<double>(y.node() + 1);
}

ModelSpec scalar_shift_model(const std::string& name, double lambda, double theta, double x0,
                             bool tanh_of_mean, double scale) {
    DriftFn drift_a = [lambda](double, const PathView& y, Eigen::Ref<Eigen::VectorXd> out) {
        out(0) = -lambda * y.scalar(y.node());
    };
    DriftFn drift_b;
    if (tanh_of_mean) {
        drift_b = [lambda, scale](double, const PathView& y, Eigen::Ref<Eigen::VectorXd> out) {
            out(0) = -lambda * y.scalar(y.node()) + scale * std::tanh(prefix_mean(y));
        };
    } else {
        drift_b = [lambda, theta](double, const PathView& y, Eigen::Ref<Eigen::VectorXd> out) {
            out(0) = -lambda * y.scalar(y.node()) + theta;
        };
    }
    DiffusionFn sigma = [](double, const PathView&, Eigen::Ref<Eigen::MatrixXd> out) {
        out(0, 0) = 1.0;
    };
    ModelSpec spec{name, CoefficientModel(1, 1, std::move(drift_a), std::move(drift_b),
                                          std::move(sigma)),
                   Eigen::VectorXd::Constant(1, x0), std::nullopt};
    spec.linear_a = LinearDrift{
        [lambda](double) { return Eigen::MatrixXd::Constant(1, 1, -lambda); },
        [](double) { return Eigen::MatrixXd::Constant(1, 1, 1.0); }};
    return spec;
}

// Deterministic orthonormal frames via a fixed counter stream and QR, so a
// given (d, m, rank) always produces the same diffusion matrix.
Eigen::MatrixXd degenerate_sigma(int d, int m, int rank) {
    CounterRng rng(0x5EEDu, static_cast<std::uint64_t>(d * 10000 + m * 100 + rank));
    Eigen::MatrixXd gu(d, rank), gv(m, rank);
    for (int j = 0; j < rank; ++j) {
        for (int i = 0; i < d; ++i) {
            gu(i, j) = rng.next_normal();
        }
        for (int i = 0; i < m; ++i) {
            gv(i, j) = rng.next_normal();
        }
    }
    const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(gu)
                                  .householderQ() *
                              Eigen::MatrixXd::Identity(d, rank);
    const Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(gv)
                                  .householderQ() *
                              Eigen::MatrixXd::Identity(m, rank);
    Eigen::VectorXd sv(rank);
    for (int j = 0; j < rank; ++j) {
        sv(j) = 1.0 + static_cast<double>(rank - 1 - j);  // non-increasing, >= 1
    }
    return u * sv.asDiagonal() * v.transpose();
}

ModelSpec degenerate_matrix_model(const ParamMap& params) {
    const int d = static_cast<int>(param_as_long(params, "d", 2));
    const int m = static_cast<int>(param_as_long(params, "m", 3));
    const int rank = static_cast<int>(param_as_long(params, "rank", 1));
    const double shift = param_as_double(params, "shift", 1.0);
    if (d < 1 || m < 1 || rank < 1 || rank > std::min(d, m)) {
        throw ConfigError("need 1 <= rank <= min(d, m)", "rank");
    }
    const Eigen::MatrixXd sigma = degenerate_sigma(d, m, rank);
    Eigen::VectorXd gamma0(m);
    for (int k = 0; k < m; ++k) {
        gamma0(k) = shift / static_cast<double>(k + 1);
    }
    const Eigen::VectorXd drift_gap = sigma * gamma0;  // keeps b - a inside Ran(sigma)

    DriftFn drift_a = [](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) {
        out.setZero();
    };
    DriftFn drift_b = [drift_gap](double, const PathView&, Eigen::Ref<Eigen::VectorXd> out) {
        out = drift_gap;
    };
    DiffusionFn sig = [sigma](double, const PathView&, Eigen::Ref<Eigen::MatrixXd> out) {
        out = sigma;
    };
    ModelSpec spec{"degenerate_matrix",
                   CoefficientModel(d, m, std::move(drift_a), std::move(drift_b), std::move(sig)),
                   Eigen::VectorXd::Zero(d), std::nullopt};
    spec.linear_a = LinearDrift{[d](double) { return Eigen::MatrixXd::Zero(d, d); },
                                [sigma](double) { return sigma; }};
    return spec;
}

}  // namespace

ModelSpec build_sde_model(const std::string& name, const ParamMap& params) {
    const double x0 = param_as_double(params, "x0", 0.0);
    if (name == "brownian_shift") {
        const double theta = param_as_double(params, "theta", 0.5);
        ModelSpec spec = scalar_shift_model(name, 0.0, theta, x0, false, 0.0);
        return spec;
    }
    if (name == "ou_shift") {
        const double lambda = param_as_double(params, "lambda", 1.0);
        const double theta = param_as_double(params, "theta", 1.0);
        return scalar_shift_model(name, lambda, theta, x0, false, 0.0);
    }
    if (name == "path_dependent") {
        const double lambda = param_as_double(params, "lambda", 1.0);
        const double scale = param_as_double(params, "scale", 1.0);
        return scalar_shift_model(name, lambda, 0.0, x0, true, scale);
    }
    if (name == "degenerate_matrix") {
        return degenerate_matrix_model(params);
    }
    throw ConfigError("unknown model '" + name + "'", "model");
}

bool is_spectral_model(const std::string& name) { return name == "galerkin"; }

SpectralModel build_spectral_model(const ParamMap& params) {
    const int n = static_cast<int>(param_as_long(params, "N", 4));
    if (n < 1) {
        throw ConfigError("mode count N must be positive", "N");
    }
    const double lambda0 = param_as_double(params, "lambda0", 1.0);
    const double q0 = param_as_double(params, "q0", 1.0);
    const double f_scale = param_as_double(params, "f_scale", 0.25);
    const std::string lambda_law = param_as_string(params, "lambda_law", "linear");
    const std::string q_law = param_as_string(params, "q_law", "const");

    Eigen::VectorXd lambda(n), q(n), e(n);
    for (int k = 0; k < n; ++k) {
        const double idx = static_cast<double>(k + 1);
        if (lambda_law == "linear") {
            lambda(k) = lambda0 * idx;
        } else if (lambda_law == "quadratic") {
            lambda(k) = lambda0 * idx * idx;
        } else {
            throw ConfigError("lambda_law must be linear or quadratic", "lambda_law");
        }
        if (q_law == "const") {
            q(k) = q0;
        } else if (q_law == "inverse") {
            q(k) = q0 / idx;
        } else if (q_law == "inverse_sq") {
            q(k) = q0 / (idx * idx);
        } else {
            throw ConfigError("q_law must be const, inverse or inverse_sq", "q_law");
        }
        e(k) = 1.0 + lambda(k);
    }
    Eigen::VectorXd sqrt_q = q.cwiseSqrt();
    SpectralModel::Nonlinearity f = [f_scale, sqrt_q](const Eigen::VectorXd& y,
                                                      Eigen::Ref<Eigen::VectorXd> out) {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            out(k) = f_scale * std::tanh(y(k)) * sqrt_q(k);
        }
    };
    return SpectralModel(std::move(lambda), std::move(q), std::move(f), std::move(e));
}

Eigen::VectorXd spectral_x0(const ParamMap& params) {
    const int n = static_cast<int>(param_as_long(params, "N", 4));
    const double x0 = param_as_double(params, "x0", 0.0);
    return Eigen::VectorXd::Constant(n, x0);
}

std::vector<std::string> model_catalog() {
    return {
        "brownian_shift    theta=0.5 x0=0        a=0, b=theta, sigma=1",
        "ou_shift          lambda=1 theta=1 x0=0 a=-lambda*X, b=a+theta, sigma=1",
        "path_dependent    lambda=1 scale=1 x0=0 b-a = scale*tanh(mean of path so far), sigma=1",
        "degenerate_matrix d=2 m=3 rank=1 shift=1 constant rank-deficient sigma, b-a in Ran(sigma)",
        "galerkin          N=4 lambda0=1 lambda_law=linear q0=1 q_law=const f_scale=0.25 x0=0",
    };
}

}  // namespace girsanov
