#pragma once

#include <Eigen/Dense>

namespace girsanov {

/// Truncated singular value decomposition: the rank-r factors above the
/// cutoff, singular values non-increasing, columns orthonormal.
struct SvdResult {
    Eigen::VectorXd singular_values;  // size r
    Eigen::MatrixXd left_vectors;     // d x r
    Eigen::MatrixXd right_vectors;    // m x r
    int rank = 0;

    Eigen::MatrixXd reconstruct() const {
        return left_vectors * singular_values.asDiagonal() * right_vectors.transpose();
    }
};

/// Numerical-rank convention: singular values at or below
/// 1e-12 * s_max * max(d, m) count as zero.
double default_sv_cutoff(const Eigen::MatrixXd& m, double largest_sv);

SvdResult compute_svd(const Eigen::MatrixXd& m, double cutoff);
SvdResult compute_svd(const Eigen::MatrixXd& m);  // relative default cutoff

/// Moore-Penrose pseudo-inverse with singular values <= cutoff treated as
/// zero; the zero matrix maps to the zero matrix. A 1x1 input follows the
/// scalar convention 1/x for x above the cutoff, 0 otherwise.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double cutoff);
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m);  // relative default cutoff

/// Rank-r reduction M = tilde_sigma * basis_v^T with tilde_sigma = U_r S_r
/// (maximal rank by construction) and basis_v the r leading right singular
/// vectors.
struct ReducedDiffusion {
    Eigen::MatrixXd tilde_sigma;  // d x r
    Eigen::MatrixXd basis_v;      // m x r
};

ReducedDiffusion reduce_diffusion(const Eigen::MatrixXd& m, double cutoff);
ReducedDiffusion reduce_diffusion(const Eigen::MatrixXd& m);

}  // namespace girsanov
