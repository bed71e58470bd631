#include <doctest.h>

#include <random>

#include "mrc/lp.hpp"
#include "support.hpp"

using namespace mrc;

TEST_SUITE("lp") {
  TEST_CASE("two-variable minimum lies on the constraint") {
    LpProblem lp(2);
    lp.set_objective(Vec{-1.0, -1.0});
    lp.add_row(Vec{1.0, 1.0}, RowSense::LessEqual, 1.0);
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.x[0] + r.x[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("contradictory bounds are infeasible") {
    LpProblem lp(1);
    lp.add_row(Vec{1.0}, RowSense::LessEqual, -1.0);
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  }

  TEST_CASE("unbounded direction is reported") {
    LpProblem lp(1);
    lp.set_objective(Vec{-1.0});
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  }

  TEST_CASE("row length mismatch is rejected") {
    LpProblem lp(2);
    CHECK_THROWS_AS(lp.add_row(Vec{1.0}, RowSense::Equal, 0.0), InputError);
  }

  TEST_CASE("free, bounded and negative-rhs variables") {
    // min x - 2y + z, x free, -1 <= y <= 3, z <= 5; x >= -4, x + y = 1, z >= 2 - y
    LpProblem lp(3);
    lp.set_objective(Vec{1.0, -2.0, 1.0});
    lp.set_free(0);
    lp.set_bounds(1, -1.0, 3.0);
    lp.set_bounds(2, -LpProblem::kInf, 5.0);
    lp.add_row(Vec{1.0, 0.0, 0.0}, RowSense::GreaterEqual, -4.0);
    lp.add_row(Vec{1.0, 1.0, 0.0}, RowSense::Equal, 1.0);
    lp.add_row(Vec{0.0, 1.0, 1.0}, RowSense::GreaterEqual, 2.0);
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    // y = 3 forces x = -2, z >= -1: value -2 - 6 - 1 = -9.
    CHECK(r.value == doctest::Approx(-9.0).epsilon(1e-12));
    CHECK(r.x[1] == doctest::Approx(3.0));
  }

  TEST_CASE("Bland and Dantzig pivoting agree and duals certify optimality") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 6, rows = 9;
      LpProblem lp(n);
      lp.set_objective(testing::random_vec(rng, n, 0.1, 2.0));
      Vec b(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const Vec a = testing::random_vec(rng, n, 0.0, 1.0);
        b[i] = testing::random_vec(rng, 1, 0.5, 2.0)[0];
        lp.add_row(a, RowSense::GreaterEqual, b[i]);
      }
      LpOptions bland;
      bland.rule = PivotRule::Bland;
      const LpResult r1 = solve_lp(lp);
      const LpResult r2 = solve_lp(lp, bland);
      REQUIRE(r1.status == LpStatus::Optimal);
      REQUIRE(r2.status == LpStatus::Optimal);
      CHECK(r1.value == doctest::Approx(r2.value).epsilon(1e-10));
      // Dual objective b^T y equals the primal value; y >= 0 for >= rows.
      double dual_value = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        CHECK(r1.duals[i] >= -1e-9);
        dual_value += b[i] * r1.duals[i];
      }
      CHECK(dual_value == doctest::Approx(r1.value).epsilon(1e-8));
    }
  }

  TEST_CASE("redundant equality rows are tolerated") {
    LpProblem lp(2);
    lp.set_objective(Vec{1.0, 2.0});
    lp.add_row(Vec{1.0, 1.0}, RowSense::Equal, 1.0);
    lp.add_row(Vec{2.0, 2.0}, RowSense::Equal, 2.0);
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(1.0));
  }
}
