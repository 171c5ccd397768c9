#include "odimdp/errors.hpp"
#include "odimdp/models.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace odimdp;

TEST_SUITE("models") {

TEST_CASE("interval ambiguity rejects broken invariants") {
  CHECK_NOTHROW(IntervalAmbiguity({0.2, 0.3}, {0.7, 0.8}));
  CHECK_THROWS_AS(IntervalAmbiguity({0.5}, {0.4}), ValidationError);
  CHECK_THROWS_AS(IntervalAmbiguity({0.6, 0.6}, {0.7, 0.7}), ValidationError);
  CHECK_THROWS_AS(IntervalAmbiguity({0.1, 0.1}, {0.3, 0.3}), ValidationError);
  CHECK_THROWS_AS(IntervalAmbiguity({}, {}), ValidationError);
  CHECK_THROWS_AS(IntervalAmbiguity({0.0, 0.0}, {1.0}), ValidationError);

  const auto pm = IntervalAmbiguity::point_mass(3, 1);
  const std::vector<double> g = {0.0, 1.0, 0.0};
  CHECK(pm.contains(g));
}

TEST_CASE("state space linearizes with axis 0 slowest") {
  const StateSpace space({3, 4}, true);
  CHECK(space.size() == 12);
  CHECK(space.interior_size() == 6);
  const std::vector<Index> c = {2, 1};
  CHECK(space.linear(c) == 9);
  CHECK(space.coords(9) == JointState{2, 1});
  CHECK(space.is_sink(4));   // (1, 0)
  CHECK(space.is_sink(2));   // (0, 2)
  CHECK_FALSE(space.is_sink(5));
}

TEST_CASE("validate_odimdp reports each violation") {
  const StateSpace space({2, 2}, false);
  const auto uniform = [](Index, Index, Index) { return IntervalAmbiguity({0, 0}, {1, 1}); };

  SUBCASE("well-formed uniform model") {
    const auto model = OdImdp::from_marginals(space, 1, uniform);
    CHECK(validate_odimdp(model).empty());
  }
  SUBCASE("lower above upper on one entry") {
    std::vector<double> lo(4 * 1 * 4, 0.0);
    std::vector<double> hi(4 * 1 * 4, 1.0);
    // row 2, axis 1, element 0
    lo[2 * 4 + 2 + 0] = 0.6;
    hi[2 * 4 + 2 + 0] = 0.5;
    const OdImdp model(space, 1, lo, hi);
    const auto report = validate_odimdp(model);
    REQUIRE(report.size() == 1);
    CHECK(report[0].state == 2);
    CHECK(report[0].action == 0);
    CHECK(report[0].axis == 1);
    CHECK(report[0].element == 0);
  }
  SUBCASE("lower bounds summing to 1.2") {
    std::vector<double> lo(16, 0.0);
    std::vector<double> hi(16, 1.0);
    lo[0] = 0.6;
    lo[1] = 0.6;
    const OdImdp model(space, 1, lo, hi);
    const auto report = validate_odimdp(model);
    REQUIRE(report.size() == 1);
    CHECK(report[0].message.find("lower bounds exceed unit mass") != std::string::npos);
    CHECK_THROWS_AS(require_valid(report, "model"), ValidationError);
  }
}

TEST_CASE("sink sources are absorbing") {
  const StateSpace space({3, 3}, true);
  const auto model = OdImdp::from_marginals(space, 1, [](Index, Index, Index) {
    return IntervalAmbiguity({0.1, 0.2, 0.3}, {0.5, 0.5, 0.5});
  });
  CHECK(model.row_count() == 4);
  // (0, 2) keeps its axis-1 coordinate and stays on the axis-0 sink.
  const Index s = space.linear(std::vector<Index>{0, 2});
  CHECK_FALSE(model.row_of(s).has_value());
  const auto a0 = model.marginal(s, 0, 0);
  const auto a1 = model.marginal(s, 0, 1);
  CHECK(a0.lower[0] == 1.0);
  CHECK(a0.upper[1] == 0.0);
  CHECK(a1.lower[2] == 1.0);
  CHECK(a1.upper[0] == 0.0);
  CHECK(validate_odimdp(model).empty());
}

TEST_CASE("product_imdp multiplies marginal bounds") {
  SUBCASE("one axis is the identity") {
    const StateSpace space({3}, false);
    const auto model = OdImdp::from_marginals(space, 2, [](Index s, Index a, Index) {
      return IntervalAmbiguity({0.1 * s, 0.1, 0.05 * a}, {0.6, 0.7, 0.8});
    });
    const auto flat = product_imdp(model);
    for (Index s = 0; s < 3; ++s) {
      for (Index a = 0; a < 2; ++a) {
        const auto j = flat.transition(s, a);
        const auto m = model.marginal(s, a, 0);
        for (Index t = 0; t < 3; ++t) {
          CHECK(j.lower[t] == m.lower[t]);
          CHECK(j.upper[t] == m.upper[t]);
        }
      }
    }
  }
  SUBCASE("joint upper 0.5 * 0.8") {
    const auto model = worked_example_model();
    const auto flat = product_imdp(model);
    CHECK(flat.transition(0, 0).upper[0] == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("random 2x2 against brute force") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
      const auto model = random_odimdp(rng, {2, 2}, 1, false);
      const auto flat = product_imdp(model);
      for (Index s = 0; s < 4; ++s) {
        const auto j = flat.transition(s, 0);
        for (Index t1 = 0; t1 < 2; ++t1) {
          for (Index t2 = 0; t2 < 2; ++t2) {
            const Index t = t1 * 2 + t2;
            CHECK(j.lower[t] == model.marginal(s, 0, 0).lower[t1] * model.marginal(s, 0, 1).lower[t2]);
            CHECK(j.upper[t] == model.marginal(s, 0, 0).upper[t1] * model.marginal(s, 0, 1).upper[t2]);
          }
        }
      }
    }
  }
  SUBCASE("degenerate marginals give the product distribution") {
    const StateSpace space({2, 3}, false);
    const auto model = OdImdp::from_marginals(space, 1, [](Index, Index, Index axis) {
      return axis == 0 ? IntervalAmbiguity::degenerate({0.25, 0.75})
                       : IntervalAmbiguity::degenerate({0.5, 0.3, 0.2});
    });
    const auto flat = product_imdp(model);
    const auto j = flat.transition(4, 0);
    const std::vector<double> expect = {0.125, 0.075, 0.05, 0.375, 0.225, 0.15};
    for (Index t = 0; t < 6; ++t) {
      CHECK(j.lower[t] == doctest::Approx(expect[t]).epsilon(1e-15));
      CHECK(j.upper[t] == j.lower[t]);
    }
  }
  SUBCASE("capacity budget") {
    const StateSpace space({10, 10}, false);
    const auto model = OdImdp::from_marginals(space, 1, [](Index, Index, Index) {
      return IntervalAmbiguity::point_mass(10, 0);
    });
    // dense: 2 * 100^2 * 1 scalars * 8 bytes = 160 kB
    CHECK_THROWS_AS(product_imdp(model, 100e3), CapacityError);
    CHECK_NOTHROW(product_imdp(model, 200e3));
  }
}

TEST_CASE("memory footprint") {
  SUBCASE("dense IMDP with 4 states and 1 action") {
    const Imdp flat(4, 1, std::vector<double>(16, 0.0), std::vector<double>(16, 1.0));
    CHECK(memory_footprint(flat).scalars == 32);
    CHECK(memory_footprint(flat).bytes == 256);
  }
  SUBCASE("one axis matches a dense IMDP") {
    const StateSpace space({5}, false);
    const auto model = OdImdp::from_marginals(space, 3, [](Index, Index, Index) {
      return IntervalAmbiguity::point_mass(5, 2);
    });
    const auto flat = product_imdp(model);
    CHECK(memory_footprint(model).scalars == memory_footprint(flat).scalars);
    CHECK(memory_footprint(model).scalars == 2 * 5 * 5 * 3);
  }
  SUBCASE("equal axis sizes follow 2 |S| |A| n |S|^(1/n)") {
    const StateSpace space({41, 41}, true);
    const auto fp = dense_imdp_footprint(space, 9);
    CHECK(fp.states_with_sinks == 1681);
    CHECK(fp.states_without_sinks == 1600);
    CHECK(fp.scalars == 2ULL * 1681 * 1681 * 9);
  }
}

TEST_CASE("ambiguity containment of product distributions") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> axes(1, 3);
  std::uniform_int_distribution<int> size(2, 4);
  for (int model_id = 0; model_id < 10; ++model_id) {
    const int n = axes(rng);
    std::vector<oracle::Vec> lo(n), hi(n);
    std::vector<Index> sizes(n);
    for (int i = 0; i < n; ++i) {
      sizes[i] = size(rng);
      oracle::random_interval(sizes[i], rng, lo[i], hi[i]);
    }
    const auto model = OdImdp::from_marginals(StateSpace(sizes, false), 1, [&](Index, Index, Index i) {
      return IntervalAmbiguity(lo[i], hi[i]);
    });
    const auto flat = product_imdp(model);
    const auto amb = flat.transition(0, 0);
    const IntervalAmbiguity joint({amb.lower.begin(), amb.lower.end()}, {amb.upper.begin(), amb.upper.end()});
    for (int k = 0; k < 1000; ++k) {
      std::vector<oracle::Vec> g(n);
      for (int i = 0; i < n; ++i) g[i] = oracle::sample_feasible(lo[i], hi[i], rng);
      std::vector<double> q(flat.state_count());
      for (Index t = 0; t < q.size(); ++t) {
        const auto c = model.space().coords(t);
        q[t] = 1.0;
        for (int i = 0; i < n; ++i) q[t] *= g[i][c[i]];
      }
      REQUIRE(joint.contains(q, 1e-12));
    }
  }
}

TEST_CASE("product bounds admit a non-factorizable distribution") {
  const auto model = worked_example_model();
  const auto flat = product_imdp(model);
  const auto amb = flat.transition(0, 0);
  const IntervalAmbiguity joint({amb.lower.begin(), amb.lower.end()}, {amb.upper.begin(), amb.upper.end()});
  const std::vector<double> q = {0.4, 0.3, 0.08, 0.22};
  REQUIRE(joint.contains(q, 1e-12));

  // Every factorization g0 x g1 with feasible marginals misses q by a margin.
  const auto m0 = model.marginal(0, 0, 0);
  const auto m1 = model.marginal(0, 0, 1);
  double best = 1.0;
  const int steps = 400;
  for (int i = 0; i <= steps; ++i) {
    const double a = m0.lower[0] + (m0.upper[0] - m0.lower[0]) * i / steps;
    if (1 - a < m0.lower[1] - 1e-12 || 1 - a > m0.upper[1] + 1e-12) continue;
    for (int j = 0; j <= steps; ++j) {
      const double b = m1.lower[0] + (m1.upper[0] - m1.lower[0]) * j / steps;
      if (1 - b < m1.lower[1] - 1e-12 || 1 - b > m1.upper[1] + 1e-12) continue;
      const double r = std::max({std::abs(a * b - q[0]), std::abs(a * (1 - b) - q[1]),
                                 std::abs((1 - a) * b - q[2]), std::abs((1 - a) * (1 - b) - q[3])});
      best = std::min(best, r);
    }
  }
  CHECK(best > 0.05);
  // q is not even rank one
  CHECK(std::abs(q[0] * q[3] - q[1] * q[2]) > 0.05);
}

}  // TEST_SUITE
