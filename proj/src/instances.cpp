#include "kfss/instances.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <set>

#include "kfss/error.hpp"

namespace kfss {

X3CInstance::X3CInstance(int m, std::vector<Triple> collection, bool strict)
    : m_(m), collection_(std::move(collection)) {
  if (m_ < 1) throw DomainError("X3C universe parameter m must be positive");
  std::set<Triple> seen;
  for (std::size_t i = 0; i < collection_.size(); ++i) {
    Triple& t = collection_[i];
    std::sort(t.begin(), t.end());
    for (int e : t) {
      if (e < 1 || e > 3 * m_) {
        throw DomainError("subset " + std::to_string(i + 1) + " has element " +
                          std::to_string(e) + " outside 1.." + std::to_string(3 * m_));
      }
    }
    if (t[0] == t[1] || t[1] == t[2]) {
      throw DomainError("subset " + std::to_string(i + 1) + " repeats an element");
    }
    if (!seen.insert(t).second && strict) {
      throw DomainError("subset " + std::to_string(i + 1) + " duplicates an earlier subset");
    }
  }
}

Matrix incidence_matrix(const X3CInstance& x3c) {
  Matrix g = Matrix::Zero(x3c.universe_size(), static_cast<Index>(x3c.tau()));
  for (std::size_t i = 0; i < x3c.tau(); ++i) {
    for (int e : x3c.collection()[i]) g(e - 1, static_cast<Index>(i)) = 1.0;
  }
  return g;
}

X3CAnswer x3c_oracle(const X3CInstance& x3c) {
  const std::size_t tau = x3c.tau();
  if (tau > kMaxOracleSubsets) {
    throw TooManySubsets("X3C oracle is limited to " + std::to_string(kMaxOracleSubsets) +
                         " subsets, got " + std::to_string(tau));
  }
  const auto m = static_cast<std::size_t>(x3c.m());
  if (m > tau) return {};

  // m <= tau <= 24 keeps the universe within 72 elements.
  using Cover = std::bitset<3 * kMaxOracleSubsets>;
  std::vector<Cover> masks(tau);
  for (std::size_t i = 0; i < tau; ++i) {
    for (int e : x3c.collection()[i]) masks[i].set(static_cast<std::size_t>(e - 1));
  }

  // Lexicographic walk over m-combinations, pruning on overlap.
  std::vector<std::size_t> pick;
  std::vector<Cover> covered{Cover{}};
  std::size_t next = 0;
  while (true) {
    if (pick.size() == m) return {true, pick};
    if (next + (m - pick.size()) <= tau) {
      const std::size_t i = next;
      if ((covered.back() & masks[i]).none()) {
        pick.push_back(i);
        covered.push_back(covered.back() | masks[i]);
        next = i + 1;
        continue;
      }
      ++next;
      continue;
    }
    if (pick.empty()) return {};
    next = pick.back() + 1;
    pick.pop_back();
    covered.pop_back();
  }
}

std::string_view family_name(const Provenance& p) {
  struct Visitor {
    std::string_view operator()(const Theorem1Provenance&) const { return "theorem1"; }
    std::string_view operator()(const Theorem2Provenance&) const { return "theorem2"; }
    std::string_view operator()(const Example1Provenance&) const { return "example1"; }
    std::string_view operator()(const CustomProvenance&) const { return "custom"; }
  };
  return std::visit(Visitor{}, p);
}

namespace {

void require_lambda1(double lambda1) {
  if (!(std::abs(lambda1) > 0.0 && std::abs(lambda1) < 1.0)) {
    throw DomainError("lambda1 must satisfy 0 < |lambda1| < 1");
  }
}

struct ReductionParts {
  SystemModel sys;
  SensorCatalog catalog;
};

ReductionParts reduction_system(const X3CInstance& x3c, double lambda1, double scale) {
  const Index n = x3c.universe_size() + 1;
  const auto tau = static_cast<Index>(x3c.tau());
  Matrix a = Matrix::Zero(n, n);
  a(0, 0) = lambda1;

  Matrix c = Matrix::Zero(tau + 1, n);
  c(0, 0) = 1.0;
  c.row(0).tail(n - 1).setConstant(scale);
  c.bottomRightCorner(tau, n - 1) = incidence_matrix(x3c).transpose();

  return {SystemModel(std::move(a), Matrix::Identity(n, n)),
          SensorCatalog::from_rows(c, Matrix::Zero(tau + 1, tau + 1))};
}

}  // namespace

HardnessInstance build_theorem1_instance(const X3CInstance& x3c, double lambda1) {
  require_lambda1(lambda1);
  auto parts = reduction_system(x3c, lambda1, 1.0);
  return {std::move(parts.sys), std::move(parts.catalog), static_cast<double>(x3c.m() + 1),
          Theorem1Provenance{x3c.m(), x3c.tau(), lambda1, x3c.collection()}};
}

double theorem2_lambda1(int m, double K) {
  const double excess = K * (3 * m + 1) - 3 * m;
  return (excess - 0.5) / excess;
}

double theorem2_epsilon(int m, double K) {
  const double excess = K * (3 * m + 1) - 3 * m;
  return 2.0 * excess * std::ceil(std::sqrt(excess - 1.0)) + 1.0;
}

HardnessInstance build_theorem2_instance(const X3CInstance& x3c, double K) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw DomainError("K must be a finite value >= 1");
  const double lambda1 = theorem2_lambda1(x3c.m(), K);
  const double epsilon = theorem2_epsilon(x3c.m(), K);
  auto parts = reduction_system(x3c, lambda1, epsilon);
  return {std::move(parts.sys), std::move(parts.catalog), static_cast<double>(x3c.m() + 1),
          Theorem2Provenance{x3c.m(), x3c.tau(), K, lambda1, epsilon, x3c.collection()}};
}

HardnessInstance build_example1_instance(double lambda1, double h) {
  require_lambda1(lambda1);
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be a finite positive value");
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = lambda1;
  Matrix c(3, 3);
  c << 1.0, h, h,
       1.0, 0.0, h,
       0.0, 1.0, 1.0;
  return {SystemModel(std::move(a), Matrix::Identity(3, 3)),
          SensorCatalog::from_rows(c, Matrix::Zero(3, 3)), 2.0,
          Example1Provenance{lambda1, h}};
}

Theorem3Sigmas theorem3_sigmas(double lambda1, double h) {
  require_lambda1(lambda1);
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be a finite positive value");
  const double gap = 1.0 - lambda1 * lambda1;
  const double inv_h2 = 1.0 / (h * h);
  // σ(α²) = 2 / (√((1-λ²-1/α²)² + 4/α²) + 1-λ²-1/α²) at α² = 2h², h², h²/2.
  const double s1 = 2.0 / (std::sqrt(std::pow(gap - 0.5 * inv_h2, 2) + 2.0 * inv_h2) + gap - 0.5 * inv_h2);
  const double s2 = 2.0 / (std::sqrt(std::pow(gap - inv_h2, 2) + 4.0 * inv_h2) + gap - inv_h2);
  const double s23 = 2.0 / (std::sqrt(std::pow(gap - 2.0 * inv_h2, 2) + 8.0 * inv_h2) + gap - 2.0 * inv_h2);
  return {s1, s2, 1.0 / gap, s2, s23};
}

}  // namespace kfss
