#include "kfss/selection.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kfss/error.hpp"
#include "kfss/parallel.hpp"

namespace kfss {

SelectionResult greedy_select(const SystemModel& sys, const SensorCatalog& catalog,
                              std::size_t budget_count, const SolverOptions& opts) {
  const auto q = static_cast<std::size_t>(catalog.q());
  if (budget_count == 0) throw DomainError("greedy selection needs a budget of at least one sensor");
  if (budget_count > q) {
    throw BudgetExceedsCatalog("budget of " + std::to_string(budget_count) +
                               " sensors exceeds the catalog of " + std::to_string(q));
  }
  for (Index i = 0; i < catalog.costs().size(); ++i) {
    if (catalog.costs()(i) != 1.0) {
      throw DomainError("greedy selection is defined for unit sensor costs only");
    }
  }

  SelectionResult result;
  result.mu = Selection::none(q);
  result.mu.set_budget(static_cast<double>(budget_count));

  for (std::size_t round = 0; round < budget_count; ++round) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < q; ++i) {
      if (!result.mu[i]) candidates.push_back(i);
    }
    auto states = detail::parallel_map(candidates.size(), [&](std::size_t k) {
      Selection trial = result.mu;
      trial.set(candidates[k]);
      return solve_dare(sys, catalog, trial, opts);
    });

    std::size_t best = 0;
    for (std::size_t k = 1; k < states.size(); ++k) {
      if (states[k] < states[best]) best = k;
    }
    result.mu.set(candidates[best]);
    result.picks.push_back(candidates[best]);
    result.trace_history.push_back(states[best].trace());
    result.steady = std::move(states[best]);
  }
  return result;
}

SelectionResult exhaustive_select(const SystemModel& sys, const SensorCatalog& catalog,
                                  double budget, const SolverOptions& opts) {
  const auto q = static_cast<std::size_t>(catalog.q());
  if (q > kMaxExhaustiveSensors) {
    throw TooManySensors("exhaustive selection is limited to " +
                         std::to_string(kMaxExhaustiveSensors) + " sensors, got " +
                         std::to_string(q));
  }
  if (!(budget >= 0.0)) throw DomainError("budget must be nonnegative");

  std::vector<unsigned long long> feasible;
  const unsigned long long total = 1ULL << q;
  for (unsigned long long bits = 0; bits < total; ++bits) {
    if (Selection::from_bits(q, bits).cost(catalog.costs()) <= budget) feasible.push_back(bits);
  }

  auto states = detail::parallel_map(feasible.size(), [&](std::size_t k) {
    return solve_dare(sys, catalog, Selection::from_bits(q, feasible[k]), opts);
  });

  // The empty selection is always feasible, so `states` is never empty.
  std::size_t best = 0;
  for (std::size_t k = 1; k < states.size(); ++k) {
    if (states[k] < states[best]) best = k;
  }
  SelectionResult result;
  result.mu = Selection::from_bits(q, feasible[best]);
  result.mu.set_budget(budget);
  result.steady = std::move(states[best]);
  return result;
}

RatioReport ratio(double trace_alg, double trace_opt) {
  RatioReport r{trace_alg, trace_opt, 0.0};
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (std::isinf(trace_alg) && std::isinf(trace_opt)) {
    r.ratio = 1.0;
  } else if (std::isinf(trace_alg)) {
    r.ratio = inf;
  } else if (trace_opt == 0.0) {
    r.ratio = trace_alg == 0.0 ? 1.0 : inf;
  } else {
    r.ratio = trace_alg / trace_opt;
  }
  return r;
}

RatioReport ratio(const SelectionResult& alg, const SelectionResult& opt) {
  return ratio(alg.trace(), opt.trace());
}

}  // namespace kfss
