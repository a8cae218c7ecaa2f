#pragma once

#include <cstddef>
#include <vector>

#include "kfss/riccati.hpp"

namespace kfss {

struct SelectionResult {
  Selection mu;
  SteadyState steady = SteadyState::unbounded();
  /// Zero-based sensor indices in the order they were added (greedy only).
  std::vector<std::size_t> picks;
  /// Best trace after each greedy round (greedy only).
  std::vector<double> trace_history;

  double trace() const noexcept { return steady.trace(); }
};

/// Ratio of an algorithm's trace to a reference trace, in extended reals.
struct RatioReport {
  double trace_alg = 0.0;
  double trace_opt = 0.0;
  double ratio = 0.0;
};

/// Greedy sensor selection with unit costs: `budget_count` rounds, each adding
/// the unchosen sensor whose inclusion minimises trace Σ. Ties go to the
/// lowest index; any finite trace beats Unbounded.
///
/// Throws BudgetExceedsCatalog when budget_count > q and DomainError when the
/// count is zero or the catalog has non-unit costs.
SelectionResult greedy_select(const SystemModel& sys, const SensorCatalog& catalog,
                              std::size_t budget_count, const SolverOptions& opts = {});

inline constexpr std::size_t kMaxExhaustiveSensors = 24;

/// Optimal selection under bᵀμ <= budget by enumerating every μ in
/// integer-counting order (bit i = sensor i). Ties keep the first mask
/// encountered, i.e. the smallest integer. Throws TooManySensors for q > 24.
SelectionResult exhaustive_select(const SystemModel& sys, const SensorCatalog& catalog,
                                  double budget, const SolverOptions& opts = {});

RatioReport ratio(double trace_alg, double trace_opt);
RatioReport ratio(const SelectionResult& alg, const SelectionResult& opt);

}  // namespace kfss
