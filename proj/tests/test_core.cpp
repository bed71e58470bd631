#include <doctest.h>

#include <cmath>

#include "mrc/types.hpp"

using namespace mrc;

TEST_SUITE("core") {
  TEST_CASE("beta of alpha") {
    CHECK(beta_of_alpha(2.0) == 2.0);
    CHECK(beta_of_alpha(0.5) == -1.0);
    CHECK(std::abs(beta_of_alpha(1e9) - 1.0) < 2e-9);
    CHECK_THROWS_AS(beta_of_alpha(1.0), InputError);
    CHECK_THROWS_AS(beta_of_alpha(0.0), InputError);
    CHECK_THROWS_AS(beta_of_alpha(-2.0), InputError);
    CHECK_THROWS_AS(beta_of_alpha(INFINITY), InputError);
    CHECK_THROWS_AS(beta_of_alpha(NAN), InputError);
  }

  TEST_CASE("loss parsing and naming") {
    CHECK(LossKind::parse("zero-one").kind() == LossKind::Kind::ZeroOne);
    CHECK(LossKind::parse("log").kind() == LossKind::Kind::Log);
    const LossKind a = LossKind::parse("alpha:4");
    CHECK(a.kind() == LossKind::Kind::Alpha);
    CHECK(a.beta() == doctest::Approx(4.0 / 3.0));
    CHECK(LossKind::parse(a.name()) == a);
    CHECK_THROWS_AS(LossKind::parse("hinge"), InputError);
    CHECK_THROWS_AS(LossKind::parse("alpha:1"), InputError);
    CHECK_THROWS_AS(LossKind::parse("alpha:2x"), InputError);
  }

  TEST_CASE("log-relative reference must be a positive distribution") {
    CHECK_NOTHROW(LossKind::log_relative({0.25, 0.75}));
    CHECK_THROWS_AS(LossKind::log_relative({0.0, 1.0}), InputError);
    CHECK_THROWS_AS(LossKind::log_relative({0.5, 0.6}), InputError);
  }

  TEST_CASE("dataset validation") {
    CHECK_NOTHROW(Dataset(1, 2, {0.0, 1.0}, {0, 1}));
    CHECK_THROWS_AS(Dataset(1, 2, {0.0, 1.0}, {0, 2}), InputError);
    CHECK_THROWS_AS(Dataset(1, 1, {0.0}, {0}), InputError);
    CHECK_THROWS_AS(Dataset(1, 2, {}, {}), InputError);
    CHECK_THROWS_AS(Dataset(1, 2, {NAN}, {0}), InputError);
    CHECK_THROWS_AS(Dataset(2, 2, {0.0, 1.0, 2.0}, {0, 1}), InputError);
    const Dataset d(1, 2, {5.0, 6.0, 7.0}, {0, 1, 1});
    const std::vector<std::size_t> pick{2, 0};
    const Dataset s = d.subset(pick);
    CHECK(s.row(0)[0] == 7.0);
    CHECK(s.label(1) == 0);
  }

  TEST_CASE("feature map blocks") {
    const FeatureMap fm(2, 2, {{0, 0.5}, {1, -1.0}});
    CHECK(fm.dim() == 6);
    const Vec x{0.3, 0.0};
    CHECK(fm.phi(x, 0) == Vec{1, 1, 0, 0, 0, 0});
    CHECK(fm.phi(x, 1) == Vec{0, 0, 0, 1, 1, 0});
    CHECK(fm.phi(Vec{-5.0, -5.0}, 0) == Vec{1, 1, 1, 0, 0, 0});
    CHECK_THROWS_AS(fm.phi(Vec{0.0}, 0), InputError);
    CHECK_THROWS_AS(fm.phi(x, 2), InputError);
    CHECK_THROWS_AS(FeatureMap(2, 1, {{1, 0.0}}), InputError);
  }

  TEST_CASE("feature map scores match explicit products") {
    const FeatureMap fm(3, 1, {{0, 0.0}, {0, 1.0}});
    const Vec mu{1, 2, 3, 4, 5, 6, 7, 8, 9};
    const Vec x{0.5};
    const Vec s = fm.scores(x, mu);
    for (int y = 0; y < 3; ++y) CHECK(s[static_cast<std::size_t>(y)] == dot(fm.phi(x, y), mu));
  }

  TEST_CASE("atoms merge identical families") {
    ConstraintAtoms atoms(2, 2);
    CHECK(atoms.add(Vec{1, 0, 0, 1}) == 0);
    CHECK(atoms.add(Vec{1, 1, 0, 1}) == 1);
    CHECK(atoms.add(Vec{1, 0, 0, 1}, 2.0) == 0);
    CHECK(atoms.size() == 2);
    CHECK(atoms.weight(0) == 3.0);
    CHECK(atoms.total_weight() == 4.0);
    CHECK(atoms.scores(1, Vec{2.0, 3.0}) == Vec{5.0, 3.0});
  }

  TEST_CASE("norms") {
    const Vec v{-3.0, 1.0, 2.0};
    CHECK(l1_norm(v) == 6.0);
    CHECK(linf_norm(v) == 3.0);
    CHECK(dot(v, v) == 14.0);
  }
}
