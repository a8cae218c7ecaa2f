#pragma once

// Steady-state a-priori error covariance of the Kalman filter for a chosen
// subset of sensors.
//
// The plant is x[k+1] = A x[k] + w[k] with E[w wᵀ] = W; every sensor i reports
// y_i = C_i x + v_i and the stacked measurement noise has covariance V. For a
// selection μ the limit Σ(μ) of the a-priori covariance exists iff (A, C(μ)) is
// detectable; otherwise the result is the Unbounded marker.

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "kfss/linalg.hpp"

namespace kfss {

/// Dynamics matrix A and process-noise covariance W. Construction validates
/// symmetry and positive semi-definiteness of W and stabilizability of
/// (A, W^{1/2}); it throws InvalidModel otherwise.
class SystemModel {
 public:
  SystemModel(Matrix a, Matrix w);

  Index n() const noexcept { return a_.rows(); }
  const Matrix& A() const noexcept { return a_; }
  const Matrix& W() const noexcept { return w_; }

 private:
  Matrix a_;
  Matrix w_;
};

/// Candidate sensors: measurement blocks C_i (s_i x n each), the joint noise
/// covariance V over all stacked rows, and a per-sensor cost.
class SensorCatalog {
 public:
  SensorCatalog(std::vector<Matrix> blocks, Matrix v, Vector costs);

  /// One single-row sensor per row of `c`.
  static SensorCatalog from_rows(const Matrix& c, Matrix v, Vector costs);
  /// Single-row sensors with unit costs.
  static SensorCatalog from_rows(const Matrix& c, Matrix v);

  Index q() const noexcept { return static_cast<Index>(blocks_.size()); }
  Index n() const noexcept { return n_; }
  Index total_rows() const noexcept { return v_.rows(); }

  const Matrix& block(Index i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  /// First stacked row belonging to sensor i.
  Index row_offset(Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }
  const Matrix& V() const noexcept { return v_; }
  const Vector& costs() const noexcept { return costs_; }

  /// All blocks stacked in sensor order.
  Matrix stacked() const;

 private:
  std::vector<Matrix> blocks_;
  std::vector<Index> offsets_;
  Matrix v_;
  Vector costs_;
  Index n_ = 0;
};

/// Binary indicator vector μ over the catalog plus the budget it is meant to
/// respect. The default budget is unconstrained.
class Selection {
 public:
  Selection() = default;
  explicit Selection(std::vector<bool> mu,
                     double budget = std::numeric_limits<double>::infinity());

  static Selection none(std::size_t q);
  static Selection all(std::size_t q);
  /// Parses "101": character i is μ for sensor i (left to right, sensor 1 first).
  static Selection from_mask(std::string_view mask);
  /// Bit i of `bits` (least significant = sensor 0) is μ_i.
  static Selection from_bits(std::size_t q, unsigned long long bits);
  /// Zero-based sensor indices.
  static Selection from_indices(std::size_t q, const std::vector<std::size_t>& indices);

  std::size_t size() const noexcept { return mu_.size(); }
  bool operator[](std::size_t i) const { return mu_.at(i); }
  void set(std::size_t i, bool on = true) { mu_.at(i) = on; }
  std::size_t count() const noexcept;
  std::vector<std::size_t> indices() const;
  double budget() const noexcept { return budget_; }
  void set_budget(double budget) noexcept { budget_ = budget; }

  double cost(const Vector& costs) const;
  bool feasible(const Vector& costs) const;
  std::string to_mask() const;

  friend bool operator==(const Selection& a, const Selection& b) { return a.mu_ == b.mu_; }

 private:
  std::vector<bool> mu_;
  double budget_ = std::numeric_limits<double>::infinity();
};

/// Either a finite steady-state covariance or the Unbounded marker. Ordering
/// is by trace, with Unbounded above every finite value.
class SteadyState {
 public:
  static SteadyState unbounded() { return SteadyState{}; }
  static SteadyState finite(Matrix sigma, std::size_t iterations);

  bool is_finite() const noexcept { return finite_; }
  bool is_unbounded() const noexcept { return !finite_; }
  /// Throws UnboundedInput on the Unbounded marker.
  const Matrix& sigma() const;
  /// +inf for Unbounded.
  double trace() const noexcept { return trace_; }
  std::size_t iterations() const noexcept { return iterations_; }

  friend std::partial_ordering operator<=>(const SteadyState& a, const SteadyState& b) {
    return a.trace_ <=> b.trace_;
  }
  friend bool operator==(const SteadyState& a, const SteadyState& b) {
    return a.trace_ == b.trace_;
  }

 private:
  SteadyState() = default;

  bool finite_ = false;
  Matrix sigma_;
  double trace_ = std::numeric_limits<double>::infinity();
  std::size_t iterations_ = 0;
};

/// Current iterate of a fixed-point covariance recursion.
struct IterationState {
  Matrix sigma;
  std::size_t k = 0;
};

struct SolverOptions {
  double tolerance = 1e-11;            // max-abs elementwise change
  std::size_t max_iterations = 1'000'000;
  double pinv_cutoff = 1e-12;          // relative to the largest singular value
};

inline constexpr double kRankCutoff = 1e-10;
inline constexpr double kDetectabilityMargin = 1e-9;

struct SelectedRows {
  Matrix c;  // p x n
  Matrix v;  // p x p
};

/// C(μ) and V(μ): the blocks with μ_i = 1 in ascending order and the matching
/// principal submatrix of V. An empty selection yields 0 x n and 0 x 0.
SelectedRows select_rows(const SensorCatalog& catalog, const Selection& sel);

/// PBH test: every eigenvalue λ of A with |λ| >= 1 - 1e-9 must leave
/// [A - λI; C] with full column rank.
bool is_detectable(const Matrix& a, const Matrix& c);

/// PBH test on (A, W^{1/2}) for every eigenvalue with |λ| >= 1.
bool is_stabilizable(const Matrix& a, const Matrix& w);

/// Steady-state a-priori covariance via the Riccati fixed point
///   Σ <- AΣAᵀ + W - AΣCᵀ (CΣCᵀ + V)⁺ CΣAᵀ
/// started from Σ₀ = W. Returns Unbounded when (A, C(μ)) is not detectable.
/// Throws DimensionMismatch or NonConvergence.
SteadyState solve_dare(const SystemModel& sys, const SensorCatalog& catalog,
                       const Selection& sel, const SolverOptions& opts = {});

/// Information-form iteration Σ <- W + A(Σ⁻¹ + CᵀV⁻¹C)⁻¹Aᵀ. Only valid when
/// both W and V(μ) are invertible; throws SingularNoise otherwise.
SteadyState solve_dare_information_form(const SystemModel& sys,
                                        const SensorCatalog& catalog,
                                        const Selection& sel,
                                        const SolverOptions& opts = {});

/// Max-abs elementwise residual of the Riccati equation at `sigma`.
double dare_residual(const Matrix& a, const Matrix& w, const Matrix& c,
                     const Matrix& v, const Matrix& sigma,
                     double pinv_cutoff = SolverOptions{}.pinv_cutoff);

/// Recovers the a-posteriori covariance Σ* from Σ = AΣ*Aᵀ + W. Throws
/// NotRecoverable when A is singular and UnboundedInput for Unbounded priors.
Matrix posterior_from_prior(const SystemModel& sys, const SteadyState& prior);

/// Positive root of the scalar Riccati equation
///   Σ = λ²(1 - Σ/(α² + Σ))Σ + 1,
/// i.e. the error variance of x[k+1] = λx[k] + w observed through unit gain
/// with measurement-noise variance α². Requires 0 < |λ| < 1 and α² >= 0.
double scalar_sigma11(double lambda1, double alpha_sq);

}  // namespace kfss
