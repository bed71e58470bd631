#include <doctest.h>

#include <cmath>
#include <random>

#include "mrc/dual.hpp"
#include "mrc/predictor.hpp"
#include "support.hpp"

using namespace mrc;

namespace {

double total(const Vec& h) {
  double s = 0.0;
  for (double v : h) s += v;
  return s;
}

MrcModel scalar_model(LossKind loss, double nu) {
  MrcModel m;
  m.loss = std::move(loss);
  m.feature_map = FeatureMap(2, 1, {});
  m.mu = Vec(2, 0.0);
  m.nu = nu;
  return m;
}

}  // namespace

TEST_SUITE("predictor") {
  TEST_CASE("zero-one rule") {
    CHECK(zero_one_rule(Vec{-3.0, -4.0}, 0.0) == Vec{0.5, 0.5});
    CHECK(zero_one_rule(Vec{0.0, 0.0, 0.0}, 1.0 / 3.0 - 1.0) == Vec(3, 1.0 / 3.0));
    CHECK(zero_one_rule(Vec{0.1, -1.5}, 0.0) == Vec{1.0, 0.0});
    const Vec h = predict_zero_one(scalar_model(LossKind::zero_one(), -0.5), Vec{0.7});
    CHECK(h == Vec{0.5, 0.5});
  }

  TEST_CASE("log rule") {
    CHECK(log_rule(Vec{0.0, 0.0}) == Vec{0.5, 0.5});
    const Vec h = log_rule(Vec{std::log(2.0), 0.0});
    CHECK(h[0] == doctest::Approx(2.0 / 3.0));
    CHECK(h[1] == doctest::Approx(1.0 / 3.0));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec s = testing::random_vec(rng, 4, -5.0, 5.0);
      const double c = testing::random_vec(rng, 1, -50.0, 50.0)[0];
      Vec shifted = s;
      for (double& v : shifted) v += c;
      const Vec a = log_rule(s), b = log_rule(shifted);
      for (std::size_t y = 0; y < 4; ++y) CHECK(std::abs(a[y] - b[y]) <= 1e-12);
    }
    CHECK(argmax_label(Vec{0.3, 0.4, 0.3}) == 1);
    CHECK(argmax_label(Vec{0.5, 0.5}) == 0);
    CHECK(argmax_label(Vec{0.2, 0.4, 0.4}) == 1);
  }

  TEST_CASE("alpha rule") {
    const double beta = beta_of_alpha(2.0);
    const double nu = nu_star_alpha(Vec{0.0, 0.0}, beta).value;
    CHECK(nu == doctest::Approx(std::sqrt(2.0) - 2.0));
    const Vec h = alpha_rule(Vec{0.0, 0.0}, nu, beta);
    CHECK(h[0] == doctest::Approx(0.5));
    CHECK(h[1] == doctest::Approx(0.5));
    for (double alpha : {0.5, 2.0, 4.0}) {
      const double b = beta_of_alpha(alpha);
      const Vec u = alpha_rule(Vec(3, 0.0), nu_star_alpha(Vec(3, 0.0), b).value, b);
      for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));
    }
    // Slack spread evenly.
    const Vec slack = alpha_rule(Vec{0.0, -10.0}, -1.5, 2.0);
    const double base0 = std::pow(-1.5 / 2.0 + 1.0, 2.0);
    CHECK(slack[0] == doctest::Approx(base0 + (1.0 - base0) / 2.0));
    CHECK(slack[1] == doctest::Approx((1.0 - base0) / 2.0));
    CHECK(total(slack) == doctest::Approx(1.0));
    // Masses beyond the constraint.
    CHECK_THROWS_AS(alpha_rule(Vec{1.0, 1.0}, 0.0, 2.0), NumericError);
    const Vec normalized = alpha_rule(Vec{1.0, 1.0}, 0.0, 2.0, 1e-6, AlphaOverflow::Normalize);
    CHECK(normalized == Vec{0.5, 0.5});
  }

  TEST_CASE("fixed-marginal rule") {
    for (double v : fixed_marginal_rule(LossKind::zero_one(), Vec(3, 0.0))) CHECK(v == doctest::Approx(1.0 / 3.0));
    CHECK(fixed_marginal_rule(LossKind::log(), Vec(3, 0.0)) == Vec(3, 1.0 / 3.0));
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 500; ++trial) {
      const Vec s = testing::random_vec(rng, 2 + trial % 4, -3.0, 3.0);
      CHECK(fixed_marginal_rule(LossKind::log(), s) == log_rule(s));
      CHECK(std::abs(total(fixed_marginal_rule(LossKind::zero_one(), s)) - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(fixed_marginal_rule(LossKind::alpha(2.0), Vec(2, 0.0)), InputError);
  }

  TEST_CASE("rules are distributions and inherit dual feasibility") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 6; ++trial) {
      const std::size_t ny = 2 + trial % 3;
      const TinyInstance inst = testing::line_instance(4, ny, {0.5, 2.5});
      Vec p = testing::random_vec(rng, 4 * ny, 0.05, 1.0);
      const double t = total(p);
      for (double& v : p) v /= t;
      const ExpectationBox box = testing::box_around(inst, p, 0.03);
      const ConstraintAtoms atoms = inst.atoms();
      for (const LossKind& loss : {LossKind::zero_one(), LossKind::log(), LossKind::alpha(3.0)}) {
        const MrcModel m = train_mrc(loss, box, atoms);
        for (std::size_t j = 0; j < atoms.size(); ++j) {
          const Vec s = atoms.scores(j, m.mu);
          const Vec h = rule_from_scores(m, s);
          CHECK(std::abs(total(h) - 1.0) <= 1e-12);
          for (std::size_t y = 0; y < ny; ++y) {
            CHECK(h[y] >= 0.0);
            if (loss.kind() == LossKind::Kind::ZeroOne) CHECK(h[y] >= s[y] + *m.nu + 1.0 - 1e-6);
            if (loss.kind() == LossKind::Kind::Log) CHECK(h[y] >= std::exp(s[y] + *m.nu) - 1e-6);
            if (loss.kind() == LossKind::Kind::Alpha) {
              const double beta = loss.beta();
              CHECK(h[y] >= std::pow(std::max((s[y] + *m.nu) / beta + 1.0, 0.0), beta) - 1e-6);
            }
          }
        }
      }
    }
  }

  TEST_CASE("predict_proba dispatches on loss and variant") {
    const FeatureMap fm(2, 1, {{0, 0.0}});
    MrcModel m;
    m.feature_map = fm;
    m.mu = Vec{0.5, -0.2, 0.1, 0.3};
    m.nu = -0.6;
    m.loss = LossKind::zero_one();
    const Vec x{-1.0};
    CHECK(predict_proba(m, x) == zero_one_rule(fm.scores(x, m.mu), -0.6));
    CHECK(predict_proba(m, x) == predict_zero_one(m, x));
    m.loss = LossKind::log();
    CHECK(predict_proba(m, x) == predict_log(m, x));
    const MrcModel expectation_log = m;
    m.variant = Variant::FixedInstanceMarginal;
    CHECK(predict_fixed_marginal(m, x) == predict_log(expectation_log, x));
    CHECK_THROWS_AS(predict_log(m, x), InputError);
    m.loss = LossKind::zero_one();
    CHECK(predict_proba(m, x) == fixed_marginal_rule(m.loss, fm.scores(x, m.mu)));
    CHECK_THROWS_AS(predict_proba(m, Vec{1.0, 2.0}), InputError);
  }

  TEST_CASE("seeded label sampling is reproducible") {
    const Vec h{0.2, 0.5, 0.3};
    LabelSampler a(42), b(42), c(43);
    std::vector<std::size_t> sa, sb, sc;
    for (int i = 0; i < 1000; ++i) {
      sa.push_back(a.sample(h));
      sb.push_back(b.sample(h));
      sc.push_back(c.sample(h));
    }
    CHECK(sa == sb);
    CHECK(sa != sc);
    std::vector<double> freq(3, 0.0);
    for (std::size_t y : sa) freq[y] += 1.0 / 1000.0;
    for (std::size_t y = 0; y < 3; ++y) CHECK(std::abs(freq[y] - h[y]) < 0.06);
    LabelSampler d(1);
    for (int i = 0; i < 100; ++i) CHECK(d.sample(Vec{0.0, 1.0, 0.0}) == 1);
  }
}
