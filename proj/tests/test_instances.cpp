#include <doctest.h>

#include <cmath>
#include <random>

#include "kfss/error.hpp"
#include "kfss/instances.hpp"
#include "kfss/selection.hpp"

using namespace kfss;

namespace {

// Gx = d over {0,1}^τ, enumerated directly.
bool binary_system_solvable(const X3CInstance& x3c) {
  const Matrix g = incidence_matrix(x3c);
  const Vector d = Vector::Ones(g.rows());
  for (unsigned long long bits = 0; bits < (1ULL << x3c.tau()); ++bits) {
    Vector x(static_cast<Index>(x3c.tau()));
    for (std::size_t i = 0; i < x3c.tau(); ++i) x(static_cast<Index>(i)) = (bits >> i & 1ULL) ? 1.0 : 0.0;
    if (g * x == d) return true;
  }
  return false;
}

std::vector<Triple> all_triples(int universe) {
  std::vector<Triple> out;
  for (int a = 1; a <= universe; ++a) {
    for (int b = a + 1; b <= universe; ++b) {
      for (int c = b + 1; c <= universe; ++c) out.push_back({a, b, c});
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("instances") {
  TEST_CASE("X3C validation") {
    CHECK_THROWS_AS(X3CInstance(0, {}), DomainError);
    CHECK_THROWS_AS(X3CInstance(1, {{1, 2, 4}}), DomainError);
    CHECK_THROWS_AS(X3CInstance(1, {{0, 1, 2}}), DomainError);
    CHECK_THROWS_AS(X3CInstance(2, {{1, 1, 2}}), DomainError);
    CHECK_NOTHROW(X3CInstance(2, {{1, 2, 3}, {3, 2, 1}}));
    CHECK_THROWS_AS(X3CInstance(2, {{1, 2, 3}, {3, 2, 1}}, true), DomainError);
    const X3CInstance sorted(2, {{6, 4, 5}});
    CHECK(sorted.collection()[0] == Triple{4, 5, 6});
  }

  TEST_CASE("incidence matrix") {
    const Matrix g1 = incidence_matrix(X3CInstance(1, {{1, 2, 3}}));
    CHECK(g1 == Matrix::Ones(3, 1));

    const Matrix g2 = incidence_matrix(X3CInstance(2, {{1, 2, 3}, {4, 5, 6}}));
    Matrix expected = Matrix::Zero(6, 2);
    expected.block(0, 0, 3, 1).setOnes();
    expected.block(3, 1, 3, 1).setOnes();
    CHECK(g2 == expected);

    std::mt19937_64 rng(3);
    const auto triples = all_triples(9);
    std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
    std::vector<Triple> collection;
    for (int i = 0; i < 12; ++i) collection.push_back(triples[pick(rng)]);
    const Matrix g = incidence_matrix(X3CInstance(3, collection));
    CHECK(g.rows() == 9);
    CHECK(g.cols() == 12);
    for (Index j = 0; j < g.cols(); ++j) CHECK(g.col(j).sum() == 3.0);
  }

  TEST_CASE("X3C oracle examples") {
    const auto yes = x3c_oracle(X3CInstance(2, {{1, 2, 3}, {4, 5, 6}}));
    CHECK(yes.has_exact_cover);
    CHECK(yes.witness == std::vector<std::size_t>{0, 1});

    const auto no = x3c_oracle(X3CInstance(2, {{1, 2, 3}, {1, 2, 4}, {3, 4, 5}}));
    CHECK_FALSE(no.has_exact_cover);
    CHECK(no.witness.empty());

    const auto mixed = x3c_oracle(X3CInstance(2, {{1, 2, 3}, {1, 4, 5}, {4, 5, 6}}));
    CHECK(mixed.has_exact_cover);
    CHECK(mixed.witness == std::vector<std::size_t>{0, 2});

    CHECK_FALSE(x3c_oracle(X3CInstance(1, {})).has_exact_cover);
    CHECK(x3c_oracle(X3CInstance(1, {{1, 2, 3}})).has_exact_cover);
  }

  TEST_CASE("X3C oracle guard") {
    std::vector<Triple> many(25, Triple{1, 2, 3});
    CHECK_THROWS_AS(x3c_oracle(X3CInstance(1, many)), TooManySubsets);
    many.pop_back();
    CHECK(x3c_oracle(X3CInstance(1, many)).has_exact_cover);
  }

  TEST_CASE("X3C oracle agrees with the binary linear system") {
    std::mt19937_64 rng(99);
    for (int m : {1, 2, 3}) {
      const auto triples = all_triples(3 * m);
      std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
      std::uniform_int_distribution<int> size(0, 9);
      for (int trial = 0; trial < 150; ++trial) {
        std::vector<Triple> collection;
        const int tau = size(rng);
        for (int i = 0; i < tau; ++i) collection.push_back(triples[pick(rng)]);
        const X3CInstance x3c(m, collection);
        const auto answer = x3c_oracle(x3c);
        CHECK(answer.has_exact_cover == binary_system_solvable(x3c));
        if (answer.has_exact_cover) {
          CHECK(answer.witness.size() == static_cast<std::size_t>(m));
          Vector covered = Vector::Zero(3 * m);
          const Matrix g = incidence_matrix(x3c);
          for (auto i : answer.witness) covered += g.col(static_cast<Index>(i));
          CHECK(covered == Vector::Ones(3 * m));
        }
      }
    }
  }

  TEST_CASE("theorem 1 instance shape") {
    const X3CInstance x3c(2, {{1, 2, 3}, {4, 5, 6}});
    const auto inst = build_theorem1_instance(x3c);
    CHECK(inst.sys.n() == 7);
    CHECK(inst.catalog.q() == 3);
    CHECK(inst.catalog.stacked().rows() == 3);
    CHECK(inst.budget == 3.0);
    CHECK(inst.sys.W() == Matrix::Identity(7, 7));
    CHECK(inst.catalog.V().isZero(0.0));
    CHECK(inst.catalog.costs() == Vector::Ones(3));
    CHECK(inst.sys.A()(0, 0) == 0.5);
    CHECK(inst.sys.A().cwiseAbs().sum() == 0.5);

    const Matrix c = inst.catalog.stacked();
    CHECK(c(0, 0) == 1.0);
    CHECK(c.row(0).tail(6) == RowVector::Ones(6));
    CHECK(c.col(0).tail(2).isZero(0.0));
    CHECK(c.bottomRightCorner(2, 6) == incidence_matrix(x3c).transpose());
    CHECK(std::get<Theorem1Provenance>(inst.provenance).tau == 2);

    CHECK_THROWS_AS(build_theorem1_instance(x3c, 1.0), DomainError);
    CHECK_THROWS_AS(build_theorem1_instance(x3c, 0.0), DomainError);
    CHECK(build_theorem1_instance(x3c, 0.3).sys.A()(0, 0) == 0.3);
  }

  TEST_CASE("theorem 1 yes and no instances") {
    const auto yes = build_theorem1_instance(X3CInstance(2, {{1, 2, 3}, {4, 5, 6}}));
    CHECK(std::abs(exhaustive_select(yes.sys, yes.catalog, yes.budget).trace() - 7.0) <= 1e-6);

    const auto no = build_theorem1_instance(X3CInstance(2, {{1, 2, 3}, {1, 2, 4}, {3, 4, 5}}));
    CHECK(exhaustive_select(no.sys, no.catalog, no.budget).trace() > 7.0 + 1e-3);
  }

  TEST_CASE("reduction soundness on sampled small collections") {
    // m = 1 collections: every subset is {1,2,3}, so only τ matters.
    for (int tau = 0; tau <= 3; ++tau) {
      const X3CInstance x3c(1, std::vector<Triple>(static_cast<std::size_t>(tau), Triple{1, 2, 3}));
      const auto inst = build_theorem1_instance(x3c);
      const double t = exhaustive_select(inst.sys, inst.catalog, inst.budget).trace();
      if (x3c_oracle(x3c).has_exact_cover) {
        CHECK(std::abs(t - 4.0) <= 1e-6);
      } else {
        CHECK(t > 4.0 + 1e-3);
      }
    }

    std::mt19937_64 rng(4242);
    const auto triples = all_triples(6);
    std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
    std::uniform_int_distribution<int> size(1, 6);
    int yes_count = 0;
    int no_count = 0;
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<Triple> collection;
      const int tau = size(rng);
      for (int i = 0; i < tau; ++i) collection.push_back(triples[pick(rng)]);
      const X3CInstance x3c(2, collection);
      const auto inst = build_theorem1_instance(x3c);
      const auto opt = exhaustive_select(inst.sys, inst.catalog, inst.budget);
      REQUIRE(opt.steady.is_finite());
      if (x3c_oracle(x3c).has_exact_cover) {
        ++yes_count;
        CHECK(std::abs(opt.trace() - 7.0) <= 1e-6);
      } else {
        ++no_count;
        CHECK(opt.trace() > 7.0 + 1e-3);
      }
    }
    CHECK(yes_count > 0);
    CHECK(no_count > 0);
  }

  TEST_CASE("theorem 2 parameters") {
    CHECK(theorem2_lambda1(1, 2.0) == 0.9);
    CHECK(theorem2_epsilon(1, 2.0) == 21.0);
    CHECK(theorem2_lambda1(1, 1.5) == doctest::Approx(2.5 / 3.0));
    CHECK(theorem2_epsilon(1, 1.5) == 13.0);

    const auto inst = build_theorem2_instance(X3CInstance(1, {{1, 2, 3}}), 2.0);
    const auto& prov = std::get<Theorem2Provenance>(inst.provenance);
    CHECK(prov.lambda1 == 0.9);
    CHECK(prov.epsilon == 21.0);
    CHECK(inst.sys.A()(0, 0) == 0.9);
    CHECK(inst.catalog.stacked().row(0) == RowVector{{1.0, 21.0, 21.0, 21.0}});
    CHECK(inst.budget == 2.0);

    CHECK_THROWS_AS(build_theorem2_instance(X3CInstance(1, {{1, 2, 3}}), 0.99), DomainError);
  }

  TEST_CASE("theorem 2 gap separates yes and no collections") {
    for (double K : {1.5, 2.0}) {
      CAPTURE(K);
      const double threshold = K * 4.0;
      const auto yes = build_theorem2_instance(X3CInstance(1, {{1, 2, 3}}), K);
      const auto opt = exhaustive_select(yes.sys, yes.catalog, yes.budget);
      CHECK(std::abs(opt.trace() - 4.0) <= 1e-6);
      CHECK(opt.trace() <= threshold);

      const auto no = build_theorem2_instance(X3CInstance(1, {}), K);
      const auto q = static_cast<std::size_t>(no.catalog.q());
      for (unsigned long long bits = 0; bits < (1ULL << q); ++bits) {
        const auto sel = Selection::from_bits(q, bits);
        if (sel.cost(no.catalog.costs()) > no.budget) continue;
        CHECK(solve_dare(no.sys, no.catalog, sel).trace() > threshold);
      }
    }
    // Same check with m = 2 and a collection that leaves element 6 uncovered.
    const auto no2 = build_theorem2_instance(X3CInstance(2, {{1, 2, 3}, {1, 2, 4}, {3, 4, 5}}), 2.0);
    CHECK(exhaustive_select(no2.sys, no2.catalog, no2.budget).trace() > 2.0 * 7.0);
  }

  TEST_CASE("reduction instances are always detectable") {
    const auto inst = build_theorem2_instance(X3CInstance(2, {{1, 2, 3}, {2, 3, 4}}), 3.0);
    const auto q = static_cast<std::size_t>(inst.catalog.q());
    for (unsigned long long bits = 0; bits < (1ULL << q); ++bits) {
      CHECK(solve_dare(inst.sys, inst.catalog, Selection::from_bits(q, bits)).is_finite());
    }
  }

  TEST_CASE("example 1 instance") {
    const auto inst = build_example1_instance(0.5, 1.0);
    Matrix c(3, 3);
    c << 1, 1, 1,
         1, 0, 1,
         0, 1, 1;
    CHECK(inst.catalog.stacked() == c);
    CHECK(inst.catalog.q() == 3);
    CHECK(inst.catalog.costs() == Vector::Ones(3));
    CHECK(inst.sys.W() == Matrix::Identity(3, 3));
    CHECK(inst.catalog.V().isZero(0.0));
    CHECK(inst.budget == 2.0);
    CHECK_THROWS_AS(build_example1_instance(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(build_example1_instance(1.5, 1.0), DomainError);
  }

  TEST_CASE("closed-form sigmas") {
    const auto s = theorem3_sigmas(0.5, 10.0);
    CHECK(s.s2 < s.s1);
    CHECK(s.s1 < s.s3);
    CHECK(s.s12 == s.s2);
    CHECK(s.s3 == doctest::Approx(4.0 / 3.0));
    CHECK(std::abs(theorem3_sigmas(0.5, 1e4).s23 - 4.0 / 3.0) <= 1e-6);
    CHECK_THROWS_AS(theorem3_sigmas(0.5, -1.0), DomainError);

    // Each closed form is the scalar curve at the matching noise level.
    for (double h : {0.3, 1.0, 10.0, 1e3}) {
      const auto t = theorem3_sigmas(0.7, h);
      CHECK(std::abs(t.s1 - scalar_sigma11(0.7, 2 * h * h)) <= 1e-9 * t.s1);
      CHECK(std::abs(t.s2 - scalar_sigma11(0.7, h * h)) <= 1e-9 * t.s2);
      CHECK(std::abs(t.s23 - scalar_sigma11(0.7, h * h / 2)) <= 1e-9 * t.s23);
    }
  }

  TEST_CASE("closed-form sigmas agree with the solver") {
    for (double lambda1 : {0.5, -0.6, 0.9, 0.99}) {
      for (double h : {0.5, 1.0, 10.0, 1e3, 1e4}) {
        CAPTURE(lambda1);
        CAPTURE(h);
        const auto inst = build_example1_instance(lambda1, h);
        const auto s = theorem3_sigmas(lambda1, h);
        auto sigma11 = [&](const char* mask) {
          return solve_dare(inst.sys, inst.catalog, Selection::from_mask(mask)).sigma()(0, 0);
        };
        CHECK(std::abs(sigma11("100") - s.s1) <= 1e-8);
        CHECK(std::abs(sigma11("010") - s.s2) <= 1e-8);
        CHECK(std::abs(sigma11("001") - s.s3) <= 1e-8);
        CHECK(std::abs(sigma11("110") - s.s12) <= 1e-8);
        CHECK(std::abs(sigma11("011") - s.s23) <= 1e-8);
      }
    }
  }

  TEST_CASE("family names") {
    CHECK(family_name(Theorem1Provenance{}) == "theorem1");
    CHECK(family_name(Theorem2Provenance{}) == "theorem2");
    CHECK(family_name(Example1Provenance{}) == "example1");
    CHECK(family_name(CustomProvenance{}) == "custom");
  }
}
