#pragma once

// Adversarial instance families for Kalman-filter sensor selection: the exact
// cover (X3C) reduction, its inapproximability variant, and the three-state
// greedy-failure example. Plus a brute-force X3C decision oracle and a
// versioned text format for archiving instances.

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kfss/riccati.hpp"

namespace kfss {

/// Element labels are 1-based, i.e. drawn from {1, ..., 3m}.
using Triple = std::array<int, 3>;

/// Exact cover by 3-sets: universe {1..3m} and a collection of 3-element
/// subsets. An empty collection is allowed (for m = 1 it is the only
/// collection without an exact cover). In strict mode duplicate subsets are
/// rejected.
class X3CInstance {
 public:
  X3CInstance(int m, std::vector<Triple> collection, bool strict = false);

  int m() const noexcept { return m_; }
  std::size_t tau() const noexcept { return collection_.size(); }
  int universe_size() const noexcept { return 3 * m_; }
  const std::vector<Triple>& collection() const noexcept { return collection_; }

 private:
  int m_;
  std::vector<Triple> collection_;
};

/// 3m x tau binary matrix whose column i indicates subset i.
Matrix incidence_matrix(const X3CInstance& x3c);

inline constexpr std::size_t kMaxOracleSubsets = 24;

struct X3CAnswer {
  bool has_exact_cover = false;
  /// Zero-based indices into the collection; the lexicographically smallest
  /// m-subset forming an exact cover, empty when there is none.
  std::vector<std::size_t> witness;
};

/// Enumerates m-subsets of the collection. Throws TooManySubsets for tau > 24.
X3CAnswer x3c_oracle(const X3CInstance& x3c);

struct Theorem1Provenance {
  int m = 0;
  std::size_t tau = 0;
  double lambda1 = 0.5;
  std::vector<Triple> collection;
};

struct Theorem2Provenance {
  int m = 0;
  std::size_t tau = 0;
  double K = 1.0;
  double lambda1 = 0.0;
  double epsilon = 0.0;
  std::vector<Triple> collection;
};

struct Example1Provenance {
  double lambda1 = 0.5;
  double h = 1.0;
};

/// Instances written by hand rather than by one of the generators.
struct CustomProvenance {};

using Provenance =
    std::variant<Theorem1Provenance, Theorem2Provenance, Example1Provenance, CustomProvenance>;

std::string_view family_name(const Provenance& p);

struct HardnessInstance {
  SystemModel sys;
  SensorCatalog catalog;
  double budget;
  Provenance provenance;
};

/// A = diag(λ₁, 0, ..., 0) of size 3m+1, W = I, V = 0, unit costs, budget
/// m+1. Sensor 1 reads [1 dᵀ] (d all ones), sensor i+1 reads [0 g_iᵀ].
HardnessInstance build_theorem1_instance(const X3CInstance& x3c, double lambda1 = 0.5);

/// λ₁ = (K(3m+1) - 3m - 1/2) / (K(3m+1) - 3m).
double theorem2_lambda1(int m, double K);
/// ε = 2(K(3m+1) - 3m)·⌈√(K(3m+1) - 3m - 1)⌉ + 1.
double theorem2_epsilon(int m, double K);

/// Same structure as the Theorem 1 instance with λ₁ and the first sensor's
/// scale ε chosen so that a yes answer yields trace 3m+1 and a no answer
/// yields trace above K(3m+1). Requires K >= 1.
HardnessInstance build_theorem2_instance(const X3CInstance& x3c, double K);

/// Three states, three sensors: A = diag(λ₁, 0, 0), C = [1 h h; 1 0 h; 0 1 1],
/// W = I, V = 0, unit costs, budget 2.
HardnessInstance build_example1_instance(double lambda1, double h);

/// (Σ)₁₁ of the Example 1 instance for the selections {1}, {2}, {3}, {1,2}
/// and {2,3}, from their closed forms.
struct Theorem3Sigmas {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s12 = 0.0;
  double s23 = 0.0;
};

Theorem3Sigmas theorem3_sigmas(double lambda1, double h);

inline constexpr int kInstanceSchemaVersion = 1;

/// Text document (JSON syntax) holding the full instance; numbers are written
/// with 17 significant digits so a round trip is bit-exact.
std::string serialize_instance(const HardnessInstance& inst);
/// Throws ParseError with the offending line and field.
HardnessInstance parse_instance(std::string_view text);

void save_instance(const std::filesystem::path& path, const HardnessInstance& inst);
HardnessInstance load_instance(const std::filesystem::path& path);

}  // namespace kfss
