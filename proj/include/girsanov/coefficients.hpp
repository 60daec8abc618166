#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "girsanov/path.hpp"
#include "girsanov/rng.hpp"

namespace girsanov {

using DriftFn = std::function<void(double t, const PathView& y, Eigen::Ref<Eigen::VectorXd> out)>;
using DiffusionFn =
    std::function<void(double t, const PathView& y, Eigen::Ref<Eigen::MatrixXd> out)>;

enum class DriftSelector { A, B };

/// The two drifts and the diffusion of the reference / target equation pair,
/// as non-anticipative functionals of the path prefix. Outputs are written
/// into caller-owned buffers so ensemble loops stay allocation-free.
class CoefficientModel {
public:
    CoefficientModel(int dim, int noise_dim, DriftFn drift_a, DriftFn drift_b, DiffusionFn sigma);

    int dimension() const noexcept { return dim_; }
    int noise_dimension() const noexcept { return noise_dim_; }

    void drift(DriftSelector which, double t, const PathView& y,
               Eigen::Ref<Eigen::VectorXd> out) const {
        (which == DriftSelector::A ? drift_a_ : drift_b_)(t, y, out);
    }
    void diffusion(double t, const PathView& y, Eigen::Ref<Eigen::MatrixXd> out) const {
        sigma_(t, y, out);
    }

    const DriftFn& drift_a() const noexcept { return drift_a_; }
    const DriftFn& drift_b() const noexcept { return drift_b_; }
    const DiffusionFn& sigma() const noexcept { return sigma_; }

private:
    int dim_;
    int noise_dim_;
    DriftFn drift_a_;
    DriftFn drift_b_;
    DiffusionFn sigma_;
};

struct NonanticipativityReport {
    std::vector<std::size_t> violations;  // probed nodes where the value changed
    bool ok() const noexcept { return violations.empty(); }
};

using VectorFunctional = std::function<Eigen::VectorXd(double t, const PathView& y)>;

/// Probe a functional for reads of the future: at randomly chosen nodes i,
/// perturb the path values strictly after node i and re-evaluate at t_i.
/// Any change is recorded as a violation at node i.
NonanticipativityReport check_nonanticipative(const VectorFunctional& f, const SamplePath& path,
                                              std::size_t probe_count, CounterRng& rng);

struct GrowthBoundReport {
    double max_ratio = 0.0;               // max over probed nodes of lhs / bound
    std::vector<std::size_t> violations;  // nodes where lhs > bound
    bool ok() const noexcept { return violations.empty(); }
};

/// Optional spot-check of the linear growth bound
///   a_i(t,Y)^2 + sigma_ik(t,Y)^2 <= L1 * int_0^t (1 + ||Y||^2) dK + L2 * (1 + ||Y(t)||^2)
/// componentwise along one sampled path, with K(s) = (s - t0)/(T - t0).
/// L1, L2 are user-asserted; this never proves the hypothesis.
GrowthBoundReport check_growth_bound(const CoefficientModel& model, const SamplePath& path,
                                     double l1, double l2);

}  // namespace girsanov
