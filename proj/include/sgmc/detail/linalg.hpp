#pragma once
#include <algorithm>
#include <Eigen/Dense>
#include <Eigen/SVD>

namespace sgmc {
namespace detail {

/// Relative singular-value cutoff of the Moore-Penrose pseudoinverse.
inline constexpr double pinv_rcond = 1e-12;

/**
 * Moore-Penrose pseudoinverse through a full SVD. Singular values below
 * rcond * sigma_max are treated as exact zeros.
 */
template <class MatrixType>
Eigen::MatrixXd pinv(const MatrixType& M, double rcond = pinv_rcond)
{
    if (M.size() == 0) return Eigen::MatrixXd::Zero(M.cols(), M.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = rcond * (sv.size() ? sv[0] : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cutoff && sv[i] > 0) inv[i] = 1.0 / sv[i];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

} // namespace detail
} // namespace sgmc
