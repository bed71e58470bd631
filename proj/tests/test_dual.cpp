#include <doctest.h>

#include <cmath>
#include <random>

#include "mrc/dual.hpp"
#include "mrc/oracle.hpp"
#include "support.hpp"

using namespace mrc;

namespace {

ConstraintAtoms single_atom(std::size_t classes) {
  return testing::label_only_instance(1, classes).atoms();
}

ExpectationBox point_box(Vec tau) {
  ExpectationBox box = box_from_bounds(tau, tau);
  box.lambda.assign(tau.size(), 0.0);
  return box;
}

// Random instance space of |X| points, box around a random distribution on it.
struct Fixture {
  TinyInstance inst;
  ExpectationBox box;
};

Fixture random_fixture(std::mt19937_64& rng, std::size_t nx, std::size_t ny, std::size_t cuts, double width) {
  Vec cut_points;
  for (std::size_t t = 0; t < cuts; ++t) cut_points.push_back(static_cast<double>(t) + 0.5);
  TinyInstance inst = testing::line_instance(nx, ny, cut_points);
  Vec p = testing::random_vec(rng, nx * ny, 0.05, 1.0);
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  ExpectationBox box = testing::box_around(inst, p, width);
  return {inst, box};
}

}  // namespace

TEST_SUITE("dual") {
  TEST_CASE("zero-one nu* by sorted prefixes") {
    CHECK(nu_star_zero_one(Vec{0.0, 0.0}).value == doctest::Approx(-0.5));
    CHECK(nu_star_zero_one(Vec{0.6, -0.8}).value == doctest::Approx(testing::subset_nu_zero_one({0.6, -0.8})));
    CHECK(nu_star_zero_one(Vec{0.6, -0.8}).value == doctest::Approx(-0.6));
    CHECK(nu_star_zero_one(Vec{-2.0, -2.0}).value == doctest::Approx(1.5));
  }

  TEST_CASE("zero-one nu* equals subset enumeration exactly") {
    std::mt19937_64 rng(11);
    for (std::size_t ny = 1; ny <= 6; ++ny) {
      for (int trial = 0; trial < 300; ++trial) {
        const Vec s = testing::random_vec(rng, ny, -2.0, 2.0);
        CHECK(nu_star_zero_one(s).value == testing::subset_nu_zero_one(s));
      }
    }
  }

  TEST_CASE("log nu*") {
    CHECK(nu_star_log(Vec{0.0, 0.0, 0.0}).value == doctest::Approx(-std::log(3.0)));
    CHECK(nu_star_log(Vec{0.0, 0.0}).value == doctest::Approx(-std::log(2.0)));
    CHECK(nu_star_log(Vec{0.0, std::log(3.0)}).value == doctest::Approx(-std::log(4.0)));
    CHECK(std::isfinite(nu_star_log(Vec{800.0, 790.0}).value));
  }

  TEST_CASE("log nu* gradient matches central differences") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec s = testing::random_vec(rng, 4, -3.0, 3.0);
      const NuStar r = nu_star_log(s);
      for (std::size_t y = 0; y < s.size(); ++y) {
        const double h = 1e-5;
        Vec up = s, down = s;
        up[y] += h;
        down[y] -= h;
        const double fd = (nu_star_log(up).value - nu_star_log(down).value) / (2 * h);
        CHECK(std::abs(fd - (-r.weights[y])) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("alpha nu* closed forms at zero scores") {
    CHECK(std::abs(nu_star_alpha(Vec{0.0, 0.0}, 2.0).value - (std::sqrt(2.0) - 2.0)) < 1e-9);
    CHECK(std::abs(nu_star_alpha(Vec(4, 0.0), 2.0).value - (-1.0)) < 1e-9);
    for (double alpha : {0.5, 2.0, 4.0}) {
      const double beta = beta_of_alpha(alpha);
      for (std::size_t ny : {2, 3, 5}) {
        const double expected = beta * (std::pow(static_cast<double>(ny), -1.0 / beta) - 1.0);
        CHECK(std::abs(nu_star_alpha(Vec(ny, 0.0), beta).value - expected) < 1e-9);
      }
    }
  }

  TEST_CASE("alpha nu* approaches log nu* as alpha tends to 1") {
    const Vec s{0.3, -0.2, 0.7};
    const double beta = beta_of_alpha(1.0001);
    CHECK(std::abs(nu_star_alpha(s, beta).value - nu_star_log(s).value) < 1e-3);
  }

  TEST_CASE("alpha nu* sits on the constraint boundary") {
    std::mt19937_64 rng(9);
    for (double alpha : {0.5, 0.8, 2.0, 4.0}) {
      const double beta = beta_of_alpha(alpha);
      for (int trial = 0; trial < 50; ++trial) {
        const Vec s = testing::random_vec(rng, 3, -2.0, 2.0);
        const double nu = nu_star_alpha(s, beta).value;
        double total = 0.0;
        for (double v : s) total += std::pow(std::max((v + nu) / beta + 1.0, 0.0), beta);
        CHECK(total <= 1.0 + 1e-12);
        CHECK(total >= 1.0 - 1e-7);
      }
    }
  }

  TEST_CASE("reduced value at the origin") {
    const ExpectationBox box = point_box({0.5, 0.5});
    CHECK(ReducedObjective(LossKind::zero_one(), box, single_atom(2)).value(Vec{0.0, 0.0}) == doctest::Approx(0.5));
    CHECK(ReducedObjective(LossKind::log(), box, single_atom(2)).value(Vec{0.0, 0.0}) ==
          doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("point box reduces to the equality objective") {
    const Vec tau{0.3, 0.7};
    const ReducedObjective obj(LossKind::log(), point_box(tau), single_atom(2));
    const Vec mu{0.4, -1.1};
    const double expected = -(tau[0] * mu[0] + tau[1] * mu[1]) + std::log(std::exp(mu[0]) + std::exp(mu[1]));
    CHECK(obj.value(mu) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("interval penalty equals the L1-regularized point penalty") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t m = 6;
      const Vec tau = testing::random_vec(rng, m, 0.0, 1.0);
      const Vec lambda = testing::random_vec(rng, m, 0.0, 2.0);
      const Vec mu = testing::random_vec(rng, m, -3.0, 3.0);
      const double n = std::floor(testing::random_vec(rng, 1, 1.0, 1000.0)[0]);
      Vec a(m), b(m);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = tau[i] - lambda[i] / std::sqrt(n);
        b[i] = tau[i] + lambda[i] / std::sqrt(n);
      }
      const ExpectationBox box = box_from_bounds(a, b);
      CHECK(std::abs(interval_penalty(box, mu) - regularized_penalty(tau, lambda, n, mu)) <= 1e-12);
    }
  }

  TEST_CASE("reduced objective is convex and its subgradients are valid") {
    std::mt19937_64 rng(21);
    for (const LossKind& loss : {LossKind::zero_one(), LossKind::log(), LossKind::alpha(2.0), LossKind::alpha(0.5)}) {
      Fixture fx = random_fixture(rng, 3, 3, 1, 0.05);
      const ReducedObjective obj(loss, fx.box, fx.inst.atoms());
      const std::size_t m = obj.dim();
      for (int trial = 0; trial < 100; ++trial) {
        const Vec mu1 = testing::random_vec(rng, m, -2.0, 2.0);
        const Vec mu2 = testing::random_vec(rng, m, -2.0, 2.0);
        const double t = testing::random_vec(rng, 1, 0.0, 1.0)[0];
        Vec mid(m);
        for (std::size_t i = 0; i < m; ++i) mid[i] = t * mu1[i] + (1 - t) * mu2[i];
        CHECK(obj.value(mid) <= t * obj.value(mu1) + (1 - t) * obj.value(mu2) + 1e-9);

        Vec g;
        const double f = obj.value_and_subgradient(mu1, g);
        Vec near = mu1;
        const Vec d = testing::random_vec(rng, m, -0.3, 0.3);
        double lin = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          near[i] += d[i];
          lin += g[i] * d[i];
        }
        CHECK(obj.value(near) >= f + lin - 1e-8);
      }
    }
  }

  TEST_CASE("label-frequency fixture reaches the known maximum entropy") {
    const ExpectationBox box = point_box({0.5, 0.5});
    const ConstraintAtoms atoms = single_atom(2);
    const MrcModel m01 = train_mrc(LossKind::zero_one(), box, atoms);
    CHECK(m01.objective_value == doctest::Approx(0.5).epsilon(1e-6));
    const MrcModel mlog = train_mrc(LossKind::log(), box, atoms);
    CHECK(mlog.objective_value == doctest::Approx(std::log(2.0)).epsilon(1e-6));

    // Oracle: three instances sharing the label-only features.
    const TinyInstance inst = testing::label_only_instance(3, 2);
    const double oracle01 = brute_force_max_entropy(LossKind::zero_one(), inst, box, std::nullopt, 0.05);
    const double oraclelog = brute_force_max_entropy(LossKind::log(), inst, box, std::nullopt, 0.05);
    CHECK(std::abs(oracle01 - m01.objective_value) <= 0.1);
    CHECK(std::abs(oraclelog - mlog.objective_value) <= 0.1);
  }

  TEST_CASE("huge widths drive the parameters to zero") {
    std::mt19937_64 rng(4);
    Fixture fx = random_fixture(rng, 3, 3, 1, 1e6);
    const MrcModel m01 = train_mrc(LossKind::zero_one(), fx.box, fx.inst.atoms());
    CHECK(l1_norm(m01.mu) == doctest::Approx(0.0));
    CHECK(m01.objective_value == doctest::Approx(1.0 - 1.0 / 3.0));
    const MrcModel mlog = train_mrc(LossKind::log(), fx.box, fx.inst.atoms());
    CHECK(l1_norm(mlog.mu) == doctest::Approx(0.0));
    CHECK(mlog.objective_value == doctest::Approx(std::log(3.0)));
  }

  TEST_CASE("exact zero-one program on simple fixtures") {
    const MrcModel lf = train_zero_one_exact(point_box({0.5, 0.5}), single_atom(2));
    CHECK(lf.objective_value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(lf.objective_value - train_mrc(LossKind::zero_one(), point_box({0.5, 0.5}), single_atom(2))
                                            .objective_value) <= 1e-3);

    // One atom whose features do not depend on the label at all.
    ConstraintAtoms flat(2, 2);
    flat.add(Vec{1.0, 1.0, 1.0, 1.0});
    const MrcModel constant = train_zero_one_exact(point_box({1.0, 1.0}), flat);
    CHECK(constant.objective_value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(constant.objective_value ==
          doctest::Approx(train_mrc(LossKind::zero_one(), point_box({1.0, 1.0}), flat).objective_value).epsilon(1e-3));
  }

  TEST_CASE("exact and subgradient solvers agree") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t ny = 2 + trial % 2;
      Fixture fx = random_fixture(rng, 2 + trial % 3, ny, 1 + trial % 2, 0.02 + 0.02 * (trial % 3));
      if (fx.box.dim() > 9) continue;
      const ConstraintAtoms atoms = fx.inst.atoms();
      const MrcModel exact = train_zero_one_exact(fx.box, atoms);
      const MrcModel iter = train_mrc(LossKind::zero_one(), fx.box, atoms);
      CHECK(std::abs(exact.objective_value - iter.objective_value) <= 1e-3 * (1 + std::abs(exact.objective_value)));
      CHECK(feasibility_residual(exact, atoms) <= 1e-9);
      CHECK(feasibility_residual(iter, atoms) <= 1e-9);
    }
  }

  TEST_CASE("solver output is dual feasible for every loss") {
    std::mt19937_64 rng(13);
    for (const LossKind& loss : {LossKind::zero_one(), LossKind::log(), LossKind::alpha(3.0), LossKind::alpha(0.6)}) {
      Fixture fx = random_fixture(rng, 3, 2, 1, 0.05);
      SolverConfig cfg;
      cfg.max_iters = 4000;
      const MrcModel model = train_mrc(loss, fx.box, fx.inst.atoms(), cfg);
      CHECK(feasibility_residual(model, fx.inst.atoms()) <= cfg.tol);
    }
  }

  TEST_CASE("dual value sandwiches the gridded primal maximum") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
      Fixture fx = random_fixture(rng, 3, 2, 1, 0.05);
      for (const LossKind& loss : {LossKind::zero_one(), LossKind::log()}) {
        const MrcModel model = train_mrc(loss, fx.box, fx.inst.atoms());
        const double oracle = brute_force_max_entropy(loss, fx.inst, fx.box, std::nullopt, 0.02);
        CHECK(std::abs(model.objective_value - oracle) <= 0.08);
      }
    }
  }

  TEST_CASE("configuration and shape errors") {
    SolverConfig cfg;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    CHECK_THROWS_AS(ReducedObjective(LossKind::zero_one(), point_box({0.5, 0.5, 0.0}), single_atom(2)), InputError);
    CHECK_THROWS_AS(train_zero_one_exact(point_box(Vec(13, 1.0 / 13)), single_atom(13)), InputError);
  }
}
