#include "girsanov/gamma_field.hpp"

#include <cmath>
#include <stdexcept>

#include "girsanov/errors.hpp"
#include "girsanov/pseudo_inverse.hpp"

namespace girsanov {

GammaField::GammaField(CoefficientModel model, std::optional<double> sv_cutoff,
                       double consistency_tol)
    : model_(std::move(model)), sv_cutoff_(sv_cutoff), consistency_tol_(consistency_tol) {
    if (sv_cutoff_ && *sv_cutoff_ < 0.0) {
        throw std::invalid_argument("GammaField: sv_cutoff must be non-negative");
    }
    if (consistency_tol_ < 0.0) {
        throw std::invalid_argument("GammaField: consistency_tol must be non-negative");
    }
}

void GammaField::Workspace::resize(int d, int m) {
    drift_a.resize(d);
    drift_b.resize(d);
    rhs.resize(d);
    sigma_gamma.resize(d);
    sigma.resize(d, m);
}

double GammaField::gamma_at_into(double t, const PathView& prefix, Workspace& ws,
                                 Eigen::Ref<Eigen::VectorXd> gamma, bool& consistent) const {
    const int d = model_.dimension();
    const int m = model_.noise_dimension();
    model_.drift(DriftSelector::A, t, prefix, ws.drift_a);
    model_.drift(DriftSelector::B, t, prefix, ws.drift_b);
    model_.diffusion(t, prefix, ws.sigma);
    ws.rhs = ws.drift_b - ws.drift_a;
    if (!ws.rhs.allFinite() || !ws.sigma.allFinite()) {
        throw NumericError("gamma_at: non-finite coefficient value", prefix.node());
    }

    if (d == 1 && m == 1) {
        const double s = ws.sigma(0, 0);
        const double g = ws.rhs(0);
        const double cutoff = sv_cutoff_ ? *sv_cutoff_ : 0.0;
        gamma(0) = (std::abs(s) > cutoff) ? g / s : 0.0;
        ws.sigma_gamma(0) = s * gamma(0);
    } else {
        const Eigen::MatrixXd pinv =
            sv_cutoff_ ? pseudo_inverse(ws.sigma, *sv_cutoff_) : pseudo_inverse(ws.sigma);
        gamma = pinv * ws.rhs;
        ws.sigma_gamma = ws.sigma * gamma;
    }
    const double residual = (ws.sigma_gamma - ws.rhs).norm();
    consistent = residual <= consistency_tol_ * (1.0 + ws.rhs.norm());
    return residual;
}

GammaValue GammaField::gamma_at(double t, const PathView& prefix) const {
    Workspace ws;
    ws.resize(model_.dimension(), model_.noise_dimension());
    GammaValue out;
    out.gamma.resize(model_.noise_dimension());
    out.residual = gamma_at_into(t, prefix, ws, out.gamma, out.consistent);
    return out;
}

}  // namespace girsanov
