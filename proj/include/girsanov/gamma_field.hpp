#pragma once

#include <Eigen/Dense>
#include <optional>

#include "girsanov/coefficients.hpp"
#include "girsanov/path.hpp"

namespace girsanov {

struct GammaValue {
    Eigen::VectorXd gamma;  // size m
    double residual;        // || sigma * gamma - (b - a) ||
    bool consistent;        // residual <= tol * (1 + ||b - a||)
};

/// Drift-difference field: gamma = sigma^+ (b - a) evaluated along path
/// prefixes, with a residual check of the compatibility condition
/// sigma * gamma = b - a. An inconsistent evaluation means the supplied
/// model admits no exact drift change through the noise.
///
/// The scalar case (d = m = 1) uses the convention 1/sigma when sigma is
/// nonzero, 0 when sigma vanishes, so gamma vanishes wherever b = a.
class GammaField {
public:
    /// sv_cutoff: absolute singular-value cutoff; std::nullopt selects the
    /// relative default 1e-12 * s_max * max(d, m) per evaluation.
    explicit GammaField(CoefficientModel model, std::optional<double> sv_cutoff = std::nullopt,
                        double consistency_tol = 1e-8);

    GammaValue gamma_at(double t, const PathView& prefix) const;

    /// Allocation-free variant for ensemble loops. Returns the residual and
    /// sets `consistent`; `gamma` must have size noise_dimension().
    struct Workspace {
        Eigen::VectorXd drift_a, drift_b, rhs, sigma_gamma;
        Eigen::MatrixXd sigma;
        void resize(int d, int m);
    };
    double gamma_at_into(double t, const PathView& prefix, Workspace& ws,
                         Eigen::Ref<Eigen::VectorXd> gamma, bool& consistent) const;

    const CoefficientModel& model() const noexcept { return model_; }
    std::optional<double> sv_cutoff() const noexcept { return sv_cutoff_; }
    double consistency_tol() const noexcept { return consistency_tol_; }

private:
    CoefficientModel model_;
    std::optional<double> sv_cutoff_;
    double consistency_tol_;
};

}  // namespace girsanov
