#pragma once

// Executable checks for the structural facts the hardness constructions rely
// on: diagonal-system covariance bounds, the scalar error curve, the
// orthogonal change of basis that isolates uncovered elements, and the
// greedy-failure ratio on the three-state example.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kfss/instances.hpp"
#include "kfss/selection.hpp"

namespace kfss {

// -- orthogonal transform ----------------------------------------------------

/// [dᵀ; G_Lᵀ]·N = [γ β; 0 G̃] with N = [N₁ N₂] orthogonal, N₁ spanning the
/// null space of G_Lᵀ (canonical vectors of uncovered elements first) and N₂
/// spanning its row space.
struct TransformReport {
  Matrix N;            // 3m x 3m
  RowVector gamma;     // dᵀN₁, length 3m - r
  RowVector beta;      // dᵀN₂, length r
  Matrix Gtilde;       // G_LᵀN₂, l x r
  std::size_t omega = 0;          // uncovered elements, i.e. unit entries placed in gamma
  Index r = 0;                    // rank of G_L
  std::vector<Index> uncovered;   // zero-based rows of G_L that are all zero
};

/// Throws DomainError when G_L is not a binary matrix of 3-element columns
/// with l <= m, and RankDeficiencyError when the numerical rank is ambiguous.
TransformReport build_transform(const Matrix& g_l, const Vector& d);

struct TransformChecks {
  double orthogonality = 0.0;   // max |NᵀN - I|
  double block = 0.0;           // max |[dᵀ; G_Lᵀ]N - [γ β; 0 G̃]|
  std::size_t unit_entries = 0; // entries of gamma within 1e-10 of 1
  double gtilde_conditioning = 0.0;  // σ_min / σ_max of G̃ (1 when r = 0)
  double row_reduction = 0.0;   // residual of writing β as a combination of G̃'s rows

  /// All four invariants at `tol`. When `expect_uncovered` (no exact cover
  /// and l <= m) omega must be at least one.
  bool passed(const TransformReport& report, bool expect_uncovered, double tol = 1e-10) const;
};

TransformChecks check_transform(const TransformReport& report, const Matrix& g_l,
                                const Vector& d);

// -- diagonal-system covariance cases --------------------------------------------

struct Lemma1Case {
  char sub_case = 'a';  // 'a'..'e'
  Index state = 0;      // zero-based
  double expected = 0.0;
  double actual = 0.0;
  double residual = 0.0;
  bool passed = false;
};

struct Lemma1Report {
  Matrix sigma;
  std::vector<Lemma1Case> cases;

  bool all_passed() const;
  double max_residual() const;
};

/// Requires diagonal A with |λᵢ| < 1, diagonal W and V = 0; throws
/// HypothesisViolation otherwise. Solves for Σ(μ) and checks every sub-case
/// that applies to each state:
///   (a) W_ii <= Σ_ii <= W_ii/(1-λᵢ²)
///   (b) W_ii = 0                  => Σ_ii = 0
///   (c) λᵢ = 0                    => Σ_ii = W_ii
///   (d) column i of C(μ) is zero  => Σ_ii = W_ii/(1-λᵢ²)   (only when W_ii != 0)
///   (e) eᵢ ∈ rowspace C(μ)        => Σ_ii = W_ii
Lemma1Report check_lemma1(const SystemModel& sys, const SensorCatalog& catalog,
                          const Selection& sel, double tol = 1e-9);

/// Row-space membership by comparing numerical ranks of C and [C; eᵢ].
bool unit_vector_in_rowspace(const Matrix& c, Index i);

// -- scalar error curve --------------------------------------------------------

struct Lemma2Curve {
  std::vector<std::pair<double, double>> points;  // (α², Σ₁₁)
  bool strictly_increasing = true;
  bool starts_at_one = true;    // vacuous unless the grid starts at 0
  bool reaches_limit = true;    // vacuous unless the grid reaches 1e10
  double closed_form_gap = 0.0; // worst scaled gap between the two closed forms

  bool passed() const {
    return strictly_increasing && starts_at_one && reaches_limit && closed_form_gap <= 1e-12;
  }
};

/// Evaluates scalar_sigma11 over a nonnegative, sorted grid. The two closed
/// forms are compared at α² > 0 with their gap divided by max(1, α², 1/α²),
/// the magnitude of the round-off each literal form carries.
Lemma2Curve lemma2_curve(double lambda1, const std::vector<double>& alpha_grid);

/// (1 + α²λ² - α² + √((α² - α²λ² - 1)² + 4α²)) / 2, evaluated as written.
double sigma11_quadratic_form(double lambda1, double alpha_sq);
/// 2 / (√((1 - λ² - 1/α²)² + 4/α²) + 1 - λ² - 1/α²), evaluated as written; α² > 0.
double sigma11_reciprocal_form(double lambda1, double alpha_sq);

// -- greedy failure ratio ------------------------------------------------------

struct Theorem3Report {
  SelectionResult greedy;
  SelectionResult optimal;
  RatioReport ratio;
  double predicted_greedy_trace = 0.0;  // σ₂₃ + 2
  double predicted_ratio = 0.0;         // (σ₂₃ + 2) / 3
  double limit_ratio = 0.0;             // h -> ∞
};

/// 2/3 + 1/(3(1 - λ₁²)).
double theorem3_limit_ratio(double lambda1);

/// Builds the three-state example, runs greedy with two picks and exhaustive
/// search with budget 2, and reports the measured and predicted ratios.
Theorem3Report theorem3_ratio(double lambda1, double h);

// -- seeded suites ---------------------------------------------------------------

struct SuiteSummary {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest residual or gap seen

  bool passed() const { return cases > 0 && failures == 0; }
};

struct RandomDiagonalInstance {
  SystemModel sys;
  SensorCatalog catalog;
};

/// Diagonal A with |λᵢ| <= 0.95 (some exactly 0), diagonal W with entries in
/// [0, 2] (some exactly 0), random binary C, V = 0; n, q in 1..6.
RandomDiagonalInstance random_diagonal_instance(std::uint64_t seed);

/// check_lemma1 on `count` random instances, each over every selection.
SuiteSummary run_lemma1_suite(std::uint64_t seed, std::size_t count, double tol = 1e-9);

/// Collections without an exact cover, for m = 1, 2, 3.
std::vector<X3CInstance> x3c_no_pool();

/// build_transform over every L with |L| <= m for each collection.
SuiteSummary run_transform_suite(const std::vector<X3CInstance>& pool);

SuiteSummary run_lemma2_suite();

/// Measured greedy trace against σ₂₃ + 2 across a (λ₁, h) grid, to 1e-8.
SuiteSummary run_theorem3_suite(const std::vector<double>& lambdas, const std::vector<double>& hs);

}  // namespace kfss
