#pragma once

// Weighted least squares by column-pivoted Householder QR of the sqrt(w)-scaled
// design. Classical homoskedastic standard errors with dof = n - rank.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ushape/design.hpp"

namespace ushape {

inline constexpr double kRankTolerance = 1e-10;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct WeightedSolution {
    Eigen::Index rank = 0;
    // Each entry: a column found dependent on earlier pivots, followed by the
    // pivots it combines (sorted column indices).
    std::vector<std::vector<Eigen::Index>> dependencies;
    // Only populated when rank == cols.
    VectorX<Scalar> coefficients;
    MatrixX<Scalar> unscaled_covariance;  // (X'WX)^-1
    Scalar weighted_rss = Scalar(0);
};

/// Reads exact linear dependencies off a pivoted QR: for every trailing pivot
/// column k, solve R11 c = R12(:, k) and keep the leading columns with a
/// non-negligible share of the combination.
template <typename Scalar>
std::vector<std::vector<Eigen::Index>> qr_dependencies(const Eigen::ColPivHouseholderQR<MatrixX<Scalar>>& qr,
                                                       const MatrixX<Scalar>& scaled) {
    using std::abs;
    const Eigen::Index p = scaled.cols();
    const Eigen::Index r = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    const MatrixX<Scalar>& packed = qr.matrixQR();
    std::vector<std::vector<Eigen::Index>> deps;
    for (Eigen::Index k = r; k < p; ++k) {
        std::vector<Eigen::Index> involved{perm(k)};
        const Scalar target_norm = scaled.col(perm(k)).norm();
        if (r > 0 && target_norm > Scalar(0)) {
            VectorX<Scalar> c = packed.topLeftCorner(r, r).template triangularView<Eigen::Upper>().solve(
                packed.block(0, k, r, 1));
            for (Eigen::Index j = 0; j < r; ++j) {
                if (abs(c(j)) * scaled.col(perm(j)).norm() > Scalar(1e-8) * target_norm) involved.push_back(perm(j));
            }
        }
        std::sort(involved.begin(), involved.end());
        deps.push_back(std::move(involved));
    }
    return deps;
}

template <typename Scalar>
WeightedSolution<Scalar> solve_weighted(const MatrixX<Scalar>& X, const VectorX<Scalar>& y, const VectorX<Scalar>& w,
                                        Scalar rank_tolerance = Scalar(kRankTolerance)) {
    const VectorX<Scalar> root = w.array().sqrt();
    const MatrixX<Scalar> scaled = root.asDiagonal() * X;
    const VectorX<Scalar> rhs = root.cwiseProduct(y);

    Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(X.rows(), X.cols());
    qr.setThreshold(rank_tolerance);
    qr.compute(scaled);

    WeightedSolution<Scalar> out;
    out.rank = qr.rank();
    if (out.rank < X.cols()) {
        out.dependencies = qr_dependencies(qr, scaled);
        return out;
    }

    out.coefficients = qr.solve(rhs);
    out.weighted_rss = (rhs - scaled * out.coefficients).squaredNorm();

    const Eigen::Index p = X.cols();
    const MatrixX<Scalar> r_upper = qr.matrixQR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const MatrixX<Scalar> r_inv =
        r_upper.template triangularView<Eigen::Upper>().solve(MatrixX<Scalar>::Identity(p, p));
    const MatrixX<Scalar> permuted = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation().indices();
    out.unscaled_covariance.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) out.unscaled_covariance(perm(i), perm(j)) = permuted(i, j);
    out.unscaled_covariance = (out.unscaled_covariance + out.unscaled_covariance.transpose()) / Scalar(2);
    return out;
}

struct FitResult {
    std::vector<std::string> labels;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;  // |coefficient| / std_error; NaN where std_error == 0
    Eigen::MatrixXd covariance;
    Eigen::Index n_obs = 0;
    Eigen::Index dof = 0;
    Eigen::Index rank = 0;
    double weighted_rss = 0.0;
    double residual_variance = 0.0;
    bool converged_rank_ok = false;

    std::optional<Eigen::Index> index(std::string_view label) const;
    /// Throws std::out_of_range for an unknown label.
    double coefficient(std::string_view label) const;
    double t_stat(std::string_view label) const;
};

struct RankReport {
    Eigen::Index rank = 0;
    Eigen::Index cols = 0;
    std::vector<std::string> suspect_columns;
    std::vector<std::vector<std::string>> dependencies;

    bool deficient() const { return rank < cols; }
};

RankReport rank_check(const DesignMatrix& design, double tolerance = kRankTolerance);

/// Throws RankDeficientError (with the dependent columns) or NoResidualDofError.
FitResult fit_wls(const DesignMatrix& design, double tolerance = kRankTolerance);

Eigen::VectorXd fitted_values(const DesignMatrix& design, const FitResult& fit);

}  // namespace ushape
