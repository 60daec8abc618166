#include "girsanov/coefficients.hpp"

#include <cmath>
#include <stdexcept>

namespace girsanov {

CoefficientModel::CoefficientModel(int dim, int noise_dim, DriftFn drift_a, DriftFn drift_b,
                                   DiffusionFn sigma)
    : dim_(dim),
      noise_dim_(noise_dim),
      drift_a_(std::move(drift_a)),
      drift_b_(std::move(drift_b)),
      sigma_(std::move(sigma)) {
    if (dim_ < 1 || noise_dim_ < 1) {
        throw std::invalid_argument("CoefficientModel: dimensions must be positive");
    }
    if (!drift_a_ || !drift_b_ || !sigma_) {
        throw std::invalid_argument("CoefficientModel: all coefficient functionals required");
    }
}

NonanticipativityReport check_nonanticipative(const VectorFunctional& f, const SamplePath& path,
                                              std::size_t probe_count, CounterRng& rng) {
    NonanticipativityReport report;
    const std::size_t n = path.grid().node_count();
    if (n < 2) {
        return report;
    }
    for (std::size_t probe = 0; probe < probe_count; ++probe) {
        // Interior node: there must be something after it to perturb.
        const std::size_t i = rng.next_u64() % (n - 1);
        const PathView before(path, i);
        const Eigen::VectorXd base = f(path.grid().node(i), before);

        Eigen::MatrixXd perturbed = path.values();
        for (std::size_t j = i + 1; j < n; ++j) {
            for (int r = 0; r < perturbed.rows(); ++r) {
                perturbed(r, j) += rng.next_normal();
            }
        }
        const PathView after(path.grid(), perturbed, i);
        const Eigen::VectorXd probed = f(path.grid().node(i), after);
        if (base.size() != probed.size() || (base.array() != probed.array()).any()) {
            report.violations.push_back(i);
        }
    }
    return report;
}

GrowthBoundReport check_growth_bound(const CoefficientModel& model, const SamplePath& path,
                                     double l1, double l2) {
    GrowthBoundReport report;
    const TimeGrid& grid = path.grid();
    const std::size_t n = grid.node_count();
    const int d = model.dimension();
    const int m = model.noise_dimension();
    Eigen::VectorXd a(d);
    Eigen::MatrixXd sig(d, m);

    // K(s) = (s - t0)/(T - t0); dK over step i is dt_i / (T - t0).
    const double span = grid.horizon() - grid.t0();
    double history = 0.0;  // int_0^t (1 + ||Y(s)||^2) dK, left sums
    for (std::size_t i = 0; i < n; ++i) {
        const PathView y(path, i);
        const double t = grid.node(i);
        model.drift(DriftSelector::A, t, y, a);
        model.diffusion(t, y, sig);
        const double bound = l1 * history + l2 * (1.0 + path.at(i).squaredNorm());
        double lhs = 0.0;
        for (int r = 0; r < d; ++r) {
            for (int k = 0; k < m; ++k) {
                lhs = std::max(lhs, a(r) * a(r) + sig(r, k) * sig(r, k));
            }
        }
        if (bound > 0.0) {
            report.max_ratio = std::max(report.max_ratio, lhs / bound);
        }
        if (lhs > bound) {
            report.violations.push_back(i);
        }
        if (i + 1 < n) {
            history += (1.0 + path.at(i).squaredNorm()) * grid.dt(i) / span;
        }
    }
    return report;
}

}  // namespace girsanov
