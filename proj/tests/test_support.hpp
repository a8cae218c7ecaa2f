#pragma once

#include <random>

#include "kfss/riccati.hpp"

namespace kfss::testing {

/// Random A rescaled so its spectral radius equals `radius`.
inline Matrix random_stable(std::mt19937_64& rng, Index n, double radius) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  return rho > 0.0 ? Matrix(a * (radius / rho)) : a;
}

inline Matrix random_spd(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix b(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) b(i, j) = g(rng);
  }
  return b * b.transpose() + 0.5 * Matrix::Identity(n, n);
}

inline Matrix random_gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

}  // namespace kfss::testing
