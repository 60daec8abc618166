#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "girsanov/coefficients.hpp"
#include "girsanov/integrators.hpp"
#include "girsanov/spectral.hpp"

namespace girsanov {

using ParamMap = std::map<std::string, std::string>;

/// Linear reference drift a(t, Y) = c(t) Y(t) with time-only diffusion;
/// carried along so truncation experiments can use the exact restart map.
struct LinearDrift {
    MatrixOfTime c;
    MatrixOfTime sigma;
};

struct ModelSpec {
    std::string name;
    CoefficientModel model;
    Eigen::VectorXd x0;
    std::optional<LinearDrift> linear_a;
};

/// Named coefficient families:
///   brownian_shift   theta (0.5), x0 (0)
///   ou_shift         lambda (1), theta (1), x0 (0)
///   path_dependent   lambda (1), scale (1), x0 (0); drift difference
///                    scale * tanh(mean of the path so far)
///   degenerate_matrix d (2), m (3), rank (1), shift (1); constant
///                    rank-deficient diffusion, b - a inside its range
/// Unknown names or malformed parameters throw ConfigError.
ModelSpec build_sde_model(const std::string& name, const ParamMap& params);

/// galerkin: N (4), lambda0 (1), lambda_law (linear | quadratic),
/// q0 (1), q_law (const | inverse | inverse_sq), f_scale (0.25), x0 (0,
/// broadcast). Nonlinearity F_k(Y) = f_scale * tanh(Y_k) * sqrt(q_k);
/// e_weights e_k = 1 + lambda_k.
SpectralModel build_spectral_model(const ParamMap& params);
Eigen::VectorXd spectral_x0(const ParamMap& params);

bool is_spectral_model(const std::string& name);

/// One line per model with its parameters and defaults.
std::vector<std::string> model_catalog();

double param_as_double(const ParamMap& params, const std::string& key, double fallback);
long param_as_long(const ParamMap& params, const std::string& key, long fallback);
std::string param_as_string(const ParamMap& params, const std::string& key,
                            const std::string& fallback);

}  // namespace girsanov
