#include "kfss/riccati.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kfss/error.hpp"

namespace kfss {

namespace {

bool all_finite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }

void require_symmetric_psd(const Matrix& m, const char* name) {
  const double scale = linalg::max_abs(m);
  if (linalg::max_abs(m - m.transpose()) > 1e-12 * scale) {
    throw InvalidModel(std::string(name) + " is not symmetric");
  }
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::symmetrize(m), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidModel(std::string(name) + " is not positive semi-definite");
  }
}

/// PBH rank test shared by detectability (stacked below) and stabilizability
/// (stacked to the right).
bool pbh_full_rank(const Matrix& a, const Matrix& other, double modulus_floor,
                   bool stack_rows) {
  const Index n = a.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> eig(a, false);
  const Eigen::VectorXcd lambdas = eig.eigenvalues();
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const Eigen::MatrixXcd oc = other.cast<std::complex<double>>();
  for (Index i = 0; i < lambdas.size(); ++i) {
    const std::complex<double> lambda = lambdas(i);
    if (std::abs(lambda) < modulus_floor) continue;
    Eigen::MatrixXcd shifted = ac - lambda * Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd pbh;
    if (stack_rows) {
      pbh.resize(n + oc.rows(), n);
      pbh << shifted, oc;
    } else {
      pbh.resize(n, n + oc.cols());
      pbh << shifted, oc;
    }
    if (linalg::numerical_rank(pbh, kRankCutoff) < n) return false;
  }
  return true;
}

void check_dimensions(const SystemModel& sys, const SensorCatalog& catalog,
                      const Selection& sel) {
  if (catalog.n() != sys.n()) {
    throw DimensionMismatch("catalog has " + std::to_string(catalog.n()) +
                            " state columns, system has " + std::to_string(sys.n()));
  }
  if (static_cast<Index>(sel.size()) != catalog.q()) {
    throw DimensionMismatch("selection has length " + std::to_string(sel.size()) +
                            ", catalog has " + std::to_string(catalog.q()) + " sensors");
  }
}

// Right-hand side of the Riccati equation. The innovation term
// ΣCᵀ(CΣCᵀ + V)⁺CΣ is evaluated through the factor X = [CL  V^{1/2}] with
// Σ = LLᵀ, so that CΣCᵀ + V = XXᵀ and the term reduces to L·P·Lᵀ where P
// projects onto the row space of X restricted to its first n coordinates.
// The row space comes from a QR-preconditioned SVD of Xᵀ, which is insensitive
// to the row scaling of C; forming CΣCᵀ explicitly would square the condition
// number. `pinv_cutoff` is relative to the largest singular value of X.
Matrix riccati_rhs(const Matrix& a, const Matrix& w, const Matrix& c, const Matrix& v,
                   const Matrix& sigma, double pinv_cutoff) {
  Matrix out = a * sigma * a.transpose() + w;
  const Index p = c.rows();
  if (p == 0) return out;
  const Index n = a.rows();

  const Matrix root = linalg::psd_sqrt(sigma);
  Matrix factor_t(n + p, p);
  factor_t.topRows(n) = (c * root).transpose();
  factor_t.bottomRows(p) = linalg::psd_sqrt(v);

  Eigen::JacobiSVD<Matrix> svd(factor_t, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return out;
  Index rank = 0;
  while (rank < s.size() && s(rank) > pinv_cutoff * s(0)) ++rank;

  const Matrix reduced = a * root * svd.matrixU().topLeftCorner(n, rank);
  out.noalias() -= reduced * reduced.transpose();
  return out;
}

template <typename Step>
SteadyState iterate_to_fixed_point(const Matrix& start, const SolverOptions& opts,
                                   Step&& step) {
  IterationState state{start, 0};
  while (state.k < opts.max_iterations) {
    Matrix next = linalg::symmetrize(step(state.sigma));
    const double change = linalg::max_abs(next - state.sigma);
    state.sigma = std::move(next);
    ++state.k;
    if (!(change == change)) break;  // NaN
    if (change < opts.tolerance) return SteadyState::finite(std::move(state.sigma), state.k);
  }
  throw NonConvergence("covariance iteration did not settle within " +
                       std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace

// ---------------------------------------------------------------------------

SystemModel::SystemModel(Matrix a, Matrix w) : a_(std::move(a)), w_(std::move(w)) {
  if (a_.rows() != a_.cols()) throw InvalidModel("A must be square");
  if (w_.rows() != a_.rows() || w_.cols() != a_.cols()) {
    throw InvalidModel("W must match the dimension of A");
  }
  if (!all_finite(a_) || !all_finite(w_)) throw InvalidModel("A and W must be finite");
  require_symmetric_psd(w_, "W");
  if (!is_stabilizable(a_, w_)) throw InvalidModel("(A, W^1/2) is not stabilizable");
}

SensorCatalog::SensorCatalog(std::vector<Matrix> blocks, Matrix v, Vector costs)
    : blocks_(std::move(blocks)), v_(std::move(v)), costs_(std::move(costs)) {
  if (blocks_.empty()) throw InvalidModel("sensor catalog is empty");
  n_ = blocks_.front().cols();
  Index offset = 0;
  offsets_.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].cols() != n_) {
      throw InvalidModel("sensor " + std::to_string(i + 1) + " has " +
                         std::to_string(blocks_[i].cols()) + " columns, expected " +
                         std::to_string(n_));
    }
    if (blocks_[i].rows() == 0) {
      throw InvalidModel("sensor " + std::to_string(i + 1) + " has no rows");
    }
    if (!all_finite(blocks_[i])) throw InvalidModel("sensor rows must be finite");
    offsets_.push_back(offset);
    offset += blocks_[i].rows();
  }
  if (v_.rows() != offset || v_.cols() != offset) {
    throw InvalidModel("V must be " + std::to_string(offset) + "x" + std::to_string(offset));
  }
  if (!all_finite(v_)) throw InvalidModel("V must be finite");
  require_symmetric_psd(v_, "V");
  if (costs_.size() != q()) throw InvalidModel("cost vector length must equal sensor count");
  for (Index i = 0; i < costs_.size(); ++i) {
    if (!std::isfinite(costs_(i)) || costs_(i) < 0.0) {
      throw InvalidModel("sensor costs must be finite and nonnegative");
    }
  }
}

SensorCatalog SensorCatalog::from_rows(const Matrix& c, Matrix v, Vector costs) {
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(c.rows()));
  for (Index i = 0; i < c.rows(); ++i) blocks.emplace_back(c.row(i));
  return SensorCatalog(std::move(blocks), std::move(v), std::move(costs));
}

SensorCatalog SensorCatalog::from_rows(const Matrix& c, Matrix v) {
  return from_rows(c, std::move(v), Vector::Ones(c.rows()));
}

Matrix SensorCatalog::stacked() const {
  Matrix out(total_rows(), n_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.middleRows(offsets_[i], blocks_[i].rows()) = blocks_[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

Selection::Selection(std::vector<bool> mu, double budget) : mu_(std::move(mu)), budget_(budget) {}

Selection Selection::none(std::size_t q) { return Selection(std::vector<bool>(q, false)); }

Selection Selection::all(std::size_t q) { return Selection(std::vector<bool>(q, true)); }

Selection Selection::from_mask(std::string_view mask) {
  std::vector<bool> mu;
  mu.reserve(mask.size());
  for (char ch : mask) {
    if (ch != '0' && ch != '1') {
      throw DomainError("selection mask may only contain '0' and '1'");
    }
    mu.push_back(ch == '1');
  }
  return Selection(std::move(mu));
}

Selection Selection::from_bits(std::size_t q, unsigned long long bits) {
  std::vector<bool> mu(q, false);
  for (std::size_t i = 0; i < q; ++i) mu[i] = ((bits >> i) & 1ULL) != 0;
  return Selection(std::move(mu));
}

Selection Selection::from_indices(std::size_t q, const std::vector<std::size_t>& indices) {
  std::vector<bool> mu(q, false);
  for (std::size_t i : indices) mu.at(i) = true;
  return Selection(std::move(mu));
}

std::size_t Selection::count() const noexcept {
  std::size_t c = 0;
  for (bool b : mu_) c += b ? 1 : 0;
  return c;
}

std::vector<std::size_t> Selection::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    if (mu_[i]) out.push_back(i);
  }
  return out;
}

double Selection::cost(const Vector& costs) const {
  if (static_cast<Index>(mu_.size()) != costs.size()) {
    throw DimensionMismatch("selection and cost vector lengths differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    if (mu_[i]) total += costs(static_cast<Index>(i));
  }
  return total;
}

bool Selection::feasible(const Vector& costs) const { return cost(costs) <= budget_; }

std::string Selection::to_mask() const {
  std::string out;
  out.reserve(mu_.size());
  for (bool b : mu_) out.push_back(b ? '1' : '0');
  return out;
}

// ---------------------------------------------------------------------------

SteadyState SteadyState::finite(Matrix sigma, std::size_t iterations) {
  SteadyState s;
  s.finite_ = true;
  s.trace_ = sigma.trace();
  s.sigma_ = std::move(sigma);
  s.iterations_ = iterations;
  return s;
}

const Matrix& SteadyState::sigma() const {
  if (!finite_) throw UnboundedInput("steady state is unbounded");
  return sigma_;
}

// ---------------------------------------------------------------------------

SelectedRows select_rows(const SensorCatalog& catalog, const Selection& sel) {
  if (static_cast<Index>(sel.size()) != catalog.q()) {
    throw DimensionMismatch("selection length does not match sensor count");
  }
  std::vector<Index> rows;
  for (std::size_t i : sel.indices()) {
    const auto idx = static_cast<Index>(i);
    for (Index r = 0; r < catalog.block(idx).rows(); ++r) rows.push_back(catalog.row_offset(idx) + r);
  }
  const auto p = static_cast<Index>(rows.size());
  SelectedRows out{Matrix(p, catalog.n()), Matrix(p, p)};
  const Matrix all = catalog.stacked();
  for (Index i = 0; i < p; ++i) {
    out.c.row(i) = all.row(rows[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < p; ++j) {
      out.v(i, j) = catalog.V()(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

bool is_detectable(const Matrix& a, const Matrix& c) {
  if (c.cols() != a.cols()) throw DimensionMismatch("C must have as many columns as A");
  return pbh_full_rank(a, c, 1.0 - kDetectabilityMargin, /*stack_rows=*/true);
}

bool is_stabilizable(const Matrix& a, const Matrix& w) {
  if (w.rows() != a.rows()) throw DimensionMismatch("W must have as many rows as A");
  return pbh_full_rank(a, linalg::psd_sqrt(w), 1.0, /*stack_rows=*/false);
}

SteadyState solve_dare(const SystemModel& sys, const SensorCatalog& catalog,
                       const Selection& sel, const SolverOptions& opts) {
  check_dimensions(sys, catalog, sel);
  const SelectedRows rows = select_rows(catalog, sel);
  if (!is_detectable(sys.A(), rows.c)) return SteadyState::unbounded();
  return iterate_to_fixed_point(sys.W(), opts, [&](const Matrix& sigma) {
    return riccati_rhs(sys.A(), sys.W(), rows.c, rows.v, sigma, opts.pinv_cutoff);
  });
}

SteadyState solve_dare_information_form(const SystemModel& sys, const SensorCatalog& catalog,
                                        const Selection& sel, const SolverOptions& opts) {
  check_dimensions(sys, catalog, sel);
  const SelectedRows rows = select_rows(catalog, sel);
  const Index n = sys.n();
  if (linalg::numerical_rank(sys.W(), opts.pinv_cutoff) < n) {
    throw SingularNoise("information form requires an invertible W");
  }
  Matrix info = Matrix::Zero(n, n);
  if (rows.c.rows() > 0) {
    Eigen::LLT<Matrix> v_chol(rows.v);
    if (v_chol.info() != Eigen::Success ||
        linalg::numerical_rank(rows.v, opts.pinv_cutoff) < rows.v.rows()) {
      throw SingularNoise("information form requires an invertible V(mu)");
    }
    info = rows.c.transpose() * v_chol.solve(rows.c);
  }
  if (!is_detectable(sys.A(), rows.c)) return SteadyState::unbounded();

  const Matrix identity = Matrix::Identity(n, n);
  return iterate_to_fixed_point(sys.W(), opts, [&](const Matrix& sigma) {
    Eigen::LLT<Matrix> sigma_chol(sigma);
    if (sigma_chol.info() != Eigen::Success) {
      throw SingularNoise("covariance iterate is not invertible");
    }
    Eigen::LLT<Matrix> posterior_info(sigma_chol.solve(identity) + info);
    if (posterior_info.info() != Eigen::Success) {
      throw SingularNoise("posterior information matrix is not invertible");
    }
    return Matrix(sys.W() + sys.A() * posterior_info.solve(sys.A().transpose()));
  });
}

double dare_residual(const Matrix& a, const Matrix& w, const Matrix& c, const Matrix& v,
                     const Matrix& sigma, double pinv_cutoff) {
  return linalg::max_abs(riccati_rhs(a, w, c, v, sigma, pinv_cutoff) - sigma);
}

Matrix posterior_from_prior(const SystemModel& sys, const SteadyState& prior) {
  if (prior.is_unbounded()) throw UnboundedInput("prior covariance is unbounded");
  const Matrix& sigma = prior.sigma();
  if (sigma.rows() != sys.n() || sigma.cols() != sys.n()) {
    throw DimensionMismatch("prior covariance does not match the system dimension");
  }
  if (linalg::numerical_rank(sys.A(), kRankCutoff) < sys.n()) {
    throw NotRecoverable("A is singular; the posterior covariance is not determined");
  }
  Eigen::PartialPivLU<Matrix> lu(sys.A());
  const Matrix left = lu.solve(Matrix(sigma - sys.W()));
  return linalg::symmetrize(lu.solve(Matrix(left.transpose())).transpose());
}

double scalar_sigma11(double lambda1, double alpha_sq) {
  if (!(std::abs(lambda1) > 0.0 && std::abs(lambda1) < 1.0)) {
    throw DomainError("scalar_sigma11 requires 0 < |lambda1| < 1");
  }
  if (!(alpha_sq >= 0.0) || !std::isfinite(alpha_sq)) {
    throw DomainError("scalar_sigma11 requires a finite alpha^2 >= 0");
  }
  // Root of Σ² + aΣ - α² = 0 with a = α²(1 - λ²) - 1, taking the branch that
  // avoids cancellation.
  const double a = alpha_sq * (1.0 - lambda1 * lambda1) - 1.0;
  const double disc = std::hypot(a, 2.0 * std::sqrt(alpha_sq));
  if (a <= 0.0) return 0.5 * (disc - a);
  return 2.0 * alpha_sq / (a + disc);
}

}  // namespace kfss
