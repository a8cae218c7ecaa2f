#include <doctest.h>

#include <cmath>
#include <random>

#include "kfss/error.hpp"
#include "kfss/instances.hpp"
#include "kfss/selection.hpp"
#include "test_support.hpp"

using namespace kfss;
using kfss::testing::random_gaussian;
using kfss::testing::random_spd;
using kfss::testing::random_stable;

TEST_SUITE("selection") {
  TEST_CASE("greedy on the three-state example picks sensors 2 then 3") {
    for (double lambda1 : {0.5, -0.5, 0.9, 0.99}) {
      for (double h : {0.5, 1.0, 10.0, 1e3}) {
        CAPTURE(lambda1);
        CAPTURE(h);
        const auto inst = build_example1_instance(lambda1, h);
        const auto g = greedy_select(inst.sys, inst.catalog, 2);
        CHECK(g.picks == std::vector<std::size_t>{1, 2});
        CHECK(g.mu.to_mask() == "011");
        CHECK(g.mu.indices() == std::vector<std::size_t>{1, 2});
        REQUIRE(g.trace_history.size() == 2);
        CHECK(g.trace_history[1] <= g.trace_history[0]);
        CHECK(g.trace() == g.trace_history.back());
      }
    }
  }

  TEST_CASE("exhaustive on the three-state example") {
    const auto inst = build_example1_instance(0.5, 10.0);
    const auto opt = exhaustive_select(inst.sys, inst.catalog, 2.0);
    CHECK(opt.mu.to_mask() == "101");
    CHECK(std::abs(opt.trace() - 3.0) <= 1e-8);
    CHECK(opt.picks.empty());

    const auto none = exhaustive_select(inst.sys, inst.catalog, 0.0);
    CHECK(none.mu.to_mask() == "000");
    CHECK(std::abs(none.trace() - (4.0 / 3.0 + 2.0)) <= 1e-9);
  }

  TEST_CASE("budget zero gives the open-loop trace") {
    const Matrix a = Vector{{0.5, -0.8, 0.0}}.asDiagonal();
    const Matrix w = Vector{{1.0, 2.0, 0.5}}.asDiagonal();
    const auto sys = SystemModel(a, w);
    const auto cat = SensorCatalog::from_rows(Matrix::Identity(3, 3), Matrix::Zero(3, 3));
    const auto r = exhaustive_select(sys, cat, 0.0);
    const double expected = 1.0 / 0.75 + 2.0 / (1.0 - 0.64) + 0.5;
    CHECK(r.mu.count() == 0);
    CHECK(std::abs(r.trace() - expected) <= 1e-9);
  }

  TEST_CASE("single candidate") {
    const auto sys = SystemModel(Matrix::Constant(1, 1, 0.5), Matrix::Identity(1, 1));
    const auto cat = SensorCatalog::from_rows(Matrix::Ones(1, 1), Matrix::Identity(1, 1));
    const auto g = greedy_select(sys, cat, 1);
    CHECK(g.picks == std::vector<std::size_t>{0});
  }

  TEST_CASE("greedy argument validation") {
    const auto inst = build_example1_instance(0.5, 10.0);
    CHECK_THROWS_AS(greedy_select(inst.sys, inst.catalog, 4), BudgetExceedsCatalog);
    CHECK_THROWS_AS(greedy_select(inst.sys, inst.catalog, 0), DomainError);
    const auto costly = SensorCatalog::from_rows(inst.catalog.stacked(), inst.catalog.V(),
                                                 Vector{{1.0, 2.0, 1.0}});
    CHECK_THROWS_AS(greedy_select(inst.sys, costly, 1), DomainError);
    CHECK_THROWS_AS(exhaustive_select(inst.sys, inst.catalog, -1.0), DomainError);
  }

  TEST_CASE("exhaustive enumeration guard") {
    const auto sys = SystemModel(Matrix::Constant(1, 1, 0.5), Matrix::Identity(1, 1));
    const auto cat = SensorCatalog::from_rows(Matrix::Ones(25, 1), Matrix::Identity(25, 25));
    CHECK_THROWS_AS(exhaustive_select(sys, cat, 1.0), TooManySensors);
  }

  TEST_CASE("ties resolve to the lowest index and smallest mask") {
    const auto sys = SystemModel(Matrix::Constant(1, 1, 0.5), Matrix::Identity(1, 1));
    const auto cat = SensorCatalog::from_rows(Matrix::Ones(3, 1), Matrix::Identity(3, 3));
    const auto g = greedy_select(sys, cat, 1);
    CHECK(g.picks == std::vector<std::size_t>{0});
    const auto opt = exhaustive_select(sys, cat, 1.0);
    CHECK(opt.mu.to_mask() == "100");
    const auto opt2 = exhaustive_select(sys, cat, 2.0);
    CHECK(opt2.mu.to_mask() == "110");
  }

  TEST_CASE("unbounded selections lose to finite ones") {
    const Matrix a = Vector{{1.5, 0.5}}.asDiagonal();
    const auto sys = SystemModel(a, Matrix::Identity(2, 2));
    Matrix c(2, 2);
    c << 0, 1,
         1, 0;
    const auto cat = SensorCatalog::from_rows(c, Matrix::Identity(2, 2));
    const auto g = greedy_select(sys, cat, 1);
    CHECK(g.picks == std::vector<std::size_t>{1});
    CHECK(g.steady.is_finite());

    const auto none = exhaustive_select(sys, cat, 0.0);
    CHECK(none.steady.is_unbounded());
    CHECK(ratio(none, none).ratio == 1.0);
    CHECK(std::isinf(ratio(none, g).ratio));
  }

  TEST_CASE("ratio arithmetic") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(ratio(3.5, 3.0).ratio == doctest::Approx(7.0 / 6.0));
    CHECK(ratio(3.0, 3.0).ratio == 1.0);
    CHECK(ratio(inf, inf).ratio == 1.0);
    CHECK(std::isinf(ratio(inf, 2.0).ratio));
    CHECK(ratio(0.0, 0.0).ratio == 1.0);
    CHECK(std::isinf(ratio(1.0, 0.0).ratio));
    const auto r = ratio(4.0, 2.0);
    CHECK(r.trace_alg == 4.0);
    CHECK(r.trace_opt == 2.0);
  }

  TEST_CASE("greedy ratio near the limit on the three-state example") {
    const auto inst = build_example1_instance(0.5, 1e3);
    const auto g = greedy_select(inst.sys, inst.catalog, 2);
    const auto o = exhaustive_select(inst.sys, inst.catalog, 2.0);
    CHECK(std::abs(ratio(g, o).ratio - 10.0 / 9.0) <= 1e-3);
  }

  TEST_CASE("greedy ratio increases with h") {
    double prev = 0.0;
    for (double h : {1.0, 10.0, 1e2, 1e3}) {
      const auto inst = build_example1_instance(0.5, h);
      const double r = ratio(greedy_select(inst.sys, inst.catalog, 2),
                             exhaustive_select(inst.sys, inst.catalog, 2.0)).ratio;
      CHECK(r > prev);
      prev = r;
    }
  }

  TEST_CASE("greedy on a reduction instance stays above the process-noise trace") {
    const X3CInstance x3c(2, {{1, 2, 3}, {4, 5, 6}, {1, 2, 4}});
    const auto inst = build_theorem1_instance(x3c);
    const auto g = greedy_select(inst.sys, inst.catalog, 3);
    CHECK(g.mu.count() == 3);
    CHECK(g.trace() >= 7.0 - 1e-9);
  }

  TEST_CASE("exhaustive optimality certificate and greedy ratio on random instances") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_int_distribution<int> sensors(2, 8);
    std::uniform_real_distribution<double> cost(0.5, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
      const Index n = dim(rng);
      const Index q = sensors(rng);
      const auto sys = SystemModel(random_stable(rng, n, 0.9), Matrix::Identity(n, n));
      const Matrix c = random_gaussian(rng, q, n);
      const Matrix v = random_spd(rng, q);
      Vector costs(q);
      for (Index i = 0; i < q; ++i) costs(i) = cost(rng);
      const auto cat = SensorCatalog::from_rows(c, v, costs);
      const double budget = 0.4 * costs.sum();

      const auto opt = exhaustive_select(sys, cat, budget);
      CHECK(opt.mu.cost(costs) <= budget);
      for (unsigned long long bits = 0; bits < (1ULL << q); ++bits) {
        const auto sel = Selection::from_bits(static_cast<std::size_t>(q), bits);
        if (sel.cost(costs) > budget) continue;
        CHECK(solve_dare(sys, cat, sel).trace() >= opt.trace() - 1e-9);
      }

      const auto unit = SensorCatalog::from_rows(c, v);
      const std::size_t p = static_cast<std::size_t>(q) / 2;
      const auto g = greedy_select(sys, unit, p);
      CHECK(g.mu.count() == p);
      for (std::size_t k = 1; k < g.trace_history.size(); ++k) {
        CHECK(g.trace_history[k] <= g.trace_history[k - 1]);
      }
      const auto o = exhaustive_select(sys, unit, static_cast<double>(p));
      CHECK(ratio(g, o).ratio >= 1.0 - 1e-9);
    }
  }

  TEST_CASE("results are reproducible") {
    const auto inst = build_example1_instance(0.9, 50.0);
    const auto a = greedy_select(inst.sys, inst.catalog, 2);
    const auto b = greedy_select(inst.sys, inst.catalog, 2);
    CHECK(a.picks == b.picks);
    CHECK(a.trace() == b.trace());
    CHECK(exhaustive_select(inst.sys, inst.catalog, 2.0).trace() ==
          exhaustive_select(inst.sys, inst.catalog, 2.0).trace());
  }
}
