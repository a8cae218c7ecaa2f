#pragma once

#include <Eigen/Dense>

namespace kfss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Moore-Penrose pseudo-inverse. Singular values below
/// `relative_cutoff * sigma_max` are treated as zero.
Matrix pseudo_inverse(const Matrix& m, double relative_cutoff);

/// Number of singular values above `relative_cutoff * sigma_max`.
/// An all-zero or empty matrix has rank 0.
Index numerical_rank(const Matrix& m, double relative_cutoff);
Index numerical_rank(const Eigen::MatrixXcd& m, double relative_cutoff);

double max_abs(const Matrix& m);

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Symmetric PSD square root; negative eigenvalues (round-off) are clamped.
Matrix psd_sqrt(const Matrix& m);

bool is_diagonal(const Matrix& m, double tol = 0.0);

}  // namespace linalg
}  // namespace kfss
