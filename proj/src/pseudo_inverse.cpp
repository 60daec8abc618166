#include "girsanov/pseudo_inverse.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace girsanov {

double default_sv_cutoff(const Eigen::MatrixXd& m, double largest_sv) {
    return 1e-12 * largest_sv * static_cast<double>(std::max(m.rows(), m.cols()));
}

SvdResult compute_svd(const Eigen::MatrixXd& m, double cutoff) {
    if (cutoff < 0.0) {
        throw std::invalid_argument("compute_svd: cutoff must be non-negative");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("compute_svd: entries must be finite");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }
    SvdResult out;
    out.rank = rank;
    out.singular_values = sv.head(rank);
    out.left_vectors = svd.matrixU().leftCols(rank);
    out.right_vectors = svd.matrixV().leftCols(rank);
    return out;
}

SvdResult compute_svd(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> probe(m);
    const double smax = probe.singularValues().size() > 0 ? probe.singularValues()(0) : 0.0;
    return compute_svd(m, default_sv_cutoff(m, smax));
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double cutoff) {
    if (cutoff < 0.0) {
        throw std::invalid_argument("pseudo_inverse: cutoff must be non-negative");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("pseudo_inverse: entries must be finite");
    }
    if (m.rows() == 1 && m.cols() == 1) {
        const double v = m(0, 0);
        Eigen::MatrixXd out(1, 1);
        out(0, 0) = (std::abs(v) > cutoff) ? 1.0 / v : 0.0;
        return out;
    }
    const SvdResult svd = compute_svd(m, cutoff);
    if (svd.rank == 0) {
        return Eigen::MatrixXd::Zero(m.cols(), m.rows());
    }
    return svd.right_vectors * svd.singular_values.cwiseInverse().asDiagonal() *
           svd.left_vectors.transpose();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> probe(m);
    const double smax = probe.singularValues().size() > 0 ? probe.singularValues()(0) : 0.0;
    return pseudo_inverse(m, default_sv_cutoff(m, smax));
}

ReducedDiffusion reduce_diffusion(const Eigen::MatrixXd& m, double cutoff) {
    const SvdResult svd = compute_svd(m, cutoff);
    ReducedDiffusion out;
    out.tilde_sigma = svd.left_vectors * svd.singular_values.asDiagonal();
    out.basis_v = svd.right_vectors;
    return out;
}

ReducedDiffusion reduce_diffusion(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> probe(m);
    const double smax = probe.singularValues().size() > 0 ? probe.singularValues()(0) : 0.0;
    return reduce_diffusion(m, default_sv_cutoff(m, smax));
}

}  // namespace girsanov
