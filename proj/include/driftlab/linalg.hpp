#pragma once

#include <Eigen/Dense>

namespace driftlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative cutoff below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Number of singular values above kRankTolerance times the largest one.
/// The zero matrix (and an empty matrix) has rank 0.
int numerical_rank(const Mat& m);

/// Largest singular value.
double operator_norm(const Mat& m);

/// Right inverse M^T (M M^T)^{-1} of a full-row-rank matrix, so that
/// M * right_pseudoinverse(M) = I. Solves the normal equations with a
/// symmetric factorization and falls back to an SVD pseudoinverse when the
/// Gram matrix is badly conditioned (condition number above 1e12).
/// Throws Error(RankDeficient) if rank(M) < rows(M).
Mat right_pseudoinverse(const Mat& m);

/// Max-abs entry of a matrix (the infinity norm on entries).
double max_abs(const Mat& m);

bool all_finite(const Vec& v);

}  // namespace driftlab
