#include "kfss/linalg.hpp"

#include <Eigen/SVD>

namespace kfss::linalg {

Matrix pseudo_inverse(const Matrix& m, double relative_cutoff) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = relative_cutoff * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

template <typename M>
Index rank_of(const M& m, double relative_cutoff) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<M> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  const double cutoff = relative_cutoff * s(0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace

Index numerical_rank(const Matrix& m, double relative_cutoff) {
  return rank_of(m, relative_cutoff);
}

Index numerical_rank(const Eigen::MatrixXcd& m, double relative_cutoff) {
  return rank_of(m, relative_cutoff);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Matrix psd_sqrt(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

bool is_diagonal(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j && std::abs(m(i, j)) > tol) return false;
    }
  }
  return true;
}

}  // namespace kfss::linalg
