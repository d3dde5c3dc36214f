#include <catch2/catch_amalgamated.hpp>

#include "pdedisc/core.hpp"
#include "pdedisc/rng.hpp"

using namespace pdedisc;

TEST_CASE("build_library: 1D scalar d,p in {1,2,3} yields 9 terms") {
  TermLibrary lib = build_library(1, 1, {{1}, {2}, {3}}, {{1}, {2}, {3}});
  REQUIRE(lib.size() == 9);
  CHECK(lib.d_max == 3);
  CHECK(lib.p_max == 3);
  // lexicographic (eq, deriv, power)
  CHECK(lib.terms[0] == TermKey{0, {1}, {1}});
  CHECK(lib.terms[1] == TermKey{0, {1}, {2}});
  CHECK(lib.terms[2] == TermKey{0, {1}, {3}});
  CHECK(lib.terms[3] == TermKey{0, {2}, {1}});
  CHECK(lib.terms[8] == TermKey{0, {3}, {3}});
}

TEST_CASE("build_library: 2D two-equation system yields 90 terms") {
  std::vector<std::vector<int>> derivs = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}};
  std::vector<std::vector<int>> powers = {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2},
                                          {2, 1}, {1, 2}, {3, 0}, {0, 3}};
  TermLibrary lib = build_library(2, 2, derivs, powers);
  REQUIRE(lib.size() == 90);
  size_t per_eq = 0;
  for (const auto& t : lib.terms)
    if (t.eq_index == 0) ++per_eq;
  CHECK(per_eq == 45);
  CHECK(lib.d_max == 2);
  CHECK(lib.p_max == 3);
}

TEST_CASE("build_library: singleton cross product") {
  TermLibrary lib = build_library(1, 1, {{1}}, {{1}});
  REQUIRE(lib.size() == 1);
  CHECK(lib.terms[0] == TermKey{0, {1}, {1}});
}

TEST_CASE("build_library: determinism and slot lookup") {
  TermLibrary a = build_library(1, 1, {{3}, {1}, {2}}, {{2}, {1}});
  TermLibrary b = build_library(1, 1, {{1}, {2}, {3}}, {{1}, {2}});
  REQUIRE(a.terms == b.terms);
  for (size_t t = 0; t < a.size(); ++t) {
    auto slot = a.find(a.terms[t]);
    REQUIRE(slot.has_value());
    CHECK(*slot == t);
  }
  CHECK_FALSE(a.find(TermKey{0, {4}, {1}}).has_value());
}

TEST_CASE("build_library: input validation") {
  CHECK_THROWS_AS(build_library(1, 1, {{1, 0}}, {{1}}), std::invalid_argument);
  CHECK_THROWS_AS(build_library(1, 1, {{1}}, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(build_library(1, 1, {{1}}, {{0}}), std::invalid_argument);
  CHECK_THROWS_AS(build_library(1, 1, {{1}, {1}}, {{1}}), std::invalid_argument);
  CHECK_THROWS_AS(build_library(1, 1, {{-1}}, {{1}}), std::invalid_argument);
}

TEST_CASE("coefficient_l1_error: examples") {
  CoefficientVector a(std::vector<double>{1.0, -2.0, 0.5});
  CHECK(coefficient_l1_error(a, a) == 0.0);
  CoefficientVector b = a;
  b[0] += 0.1;
  CHECK(coefficient_l1_error(b, a) == Catch::Approx(0.1));
  CoefficientVector z(3, 0.0), t(3, 0.0);
  t[1] = -1.0;
  CHECK(coefficient_l1_error(z, t) == Catch::Approx(1.0));
  CHECK_THROWS_AS(coefficient_l1_error(z, CoefficientVector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("coefficient_l1_error: symmetry property") {
  SplitMix64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    CoefficientVector a(7), b(7);
    for (size_t i = 0; i < 7; ++i) {
      a[i] = rng.next_normal();
      b[i] = rng.next_normal();
    }
    CHECK(coefficient_l1_error(a, b) == Catch::Approx(coefficient_l1_error(b, a)));
    CHECK(coefficient_l1_error(a, a) == 0.0);
  }
}

TEST_CASE("Grid and Field invariants") {
  Grid g;
  g.dims = {4, 3};
  g.spacing = {0.5, 0.25};
  g.origin = {0.0, -1.0};
  g.validate();
  CHECK(g.node_count() == 12);
  CHECK(g.min_spacing() == 0.25);
  CHECK(g.cell_volume() == Catch::Approx(0.125));
  CHECK(g.coordinate(1, 2) == Catch::Approx(-0.5));

  Field f(g, 2);
  CHECK(f.data.size() == 24);
  f.validate();
  f.component(1)[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(f.validate(), data_error);

  Grid bad = g;
  bad.spacing[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), data_error);
}

TEST_CASE("Dataset invariants") {
  Grid g;
  g.dims = {5};
  g.spacing = {0.1};
  g.origin = {0.0};
  Dataset ds;
  ds.grid = g;
  ds.times = {0.0, 0.5};
  ds.snapshots = {Field(g, 1), Field(g, 1)};
  ds.validate();
  ds.times = {0.5, 0.5};
  CHECK_THROWS_AS(ds.validate(), data_error);
}
