#pragma once

#include <Eigen/Dense>

#include "varitherm/errors.hpp"

namespace varitherm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative pivot tolerance for dense symmetric solves.
inline constexpr double kPivotTol = 1e-12;

/// Solve A x = b for symmetric A via a pivoted LDL^T factorization.
/// Throws E when a diagonal pivot falls below kPivotTol relative to the largest.
template <class E>
Vec solve_symmetric(const Mat& A, const Vec& b) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw DimensionMismatch("solve_symmetric: shape mismatch");
    Eigen::LDLT<Mat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw E("factorization failed");
    const Vec d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax <= 0.0 || d.cwiseAbs().minCoeff() < kPivotTol * dmax)
        throw E("pivot below tolerance");
    return ldlt.solve(b);
}

/// True when M is symmetric to within an absolute tolerance scaled by its magnitude.
inline bool is_symmetric(const Mat& M, double tol = 1e-12) {
    if (M.rows() != M.cols()) return false;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// True when symmetric M is positive semidefinite (smallest eigenvalue >= -tol*scale).
inline bool is_psd(const Mat& M, double tol = 1e-10) {
    if (M.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -tol * scale;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace varitherm
