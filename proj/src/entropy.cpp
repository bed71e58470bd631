#include "mrc/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace mrc {
namespace {

// p * log(p / q) style terms with the 0 log 0 = 0 convention.
double xlog_ratio(double p, double num, double den) {
  if (p == 0.0) return 0.0;
  return p * std::log(num / den);
}

std::size_t lattice_steps(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InputError("grid step must lie in (0, 1]");
  return static_cast<std::size_t>(std::llround(1.0 / grid_step));
}

}  // namespace

ExplicitDistribution::ExplicitDistribution(std::size_t num_instances, std::size_t num_classes, Vec probs)
    : num_instances_(num_instances), num_classes_(num_classes), probs_(std::move(probs)) {
  if (probs_.size() != num_instances_ * num_classes_) throw InputError("distribution has wrong size");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw InputError("probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("probabilities must sum to 1");
}

double ExplicitDistribution::marginal_x(std::size_t x) const {
  double s = 0.0;
  for (std::size_t y = 0; y < num_classes_; ++y) s += (*this)(x, y);
  return s;
}

double ExplicitDistribution::marginal_y(std::size_t y) const {
  double s = 0.0;
  for (std::size_t x = 0; x < num_instances_; ++x) s += (*this)(x, y);
  return s;
}

double score(const LossKind& loss, std::span<const double> q, std::size_t y) {
  if (y >= q.size()) throw InputError("label out of range");
  double mass = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw InputError("score needs a nonnegative distribution");
    mass += v;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw InputError("score needs a distribution summing to 1");
  const double qy = q[y];
  switch (loss.kind()) {
    case LossKind::Kind::ZeroOne:
      return 1.0 - qy;
    case LossKind::Kind::Log:
      return qy > 0.0 ? -std::log(qy) : INFINITY;
    case LossKind::Kind::Alpha: {
      const double beta = loss.beta();
      if (qy <= 0.0) return beta > 0.0 ? beta : INFINITY;
      return beta * (1.0 - std::pow(qy, 1.0 / beta));
    }
    case LossKind::Kind::LogRelative: {
      const Vec& p0 = loss.reference();
      if (p0.size() != q.size()) throw InputError("reference distribution size mismatch");
      return qy > 0.0 ? std::log(p0[y] / qy) : INFINITY;
    }
  }
  return NAN;
}

double empirical_risk(const LossKind& loss, std::span<const Vec> rule, const Dataset& data) {
  if (rule.size() != data.size()) throw InputError("rule must cover every instance");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += score(loss, rule[i], static_cast<std::size_t>(data.label(i)));
  }
  return total / static_cast<double>(data.size());
}

double expected_loss(const LossKind& loss, std::span<const Vec> rule, const ExplicitDistribution& p) {
  if (rule.size() != p.num_instances()) throw InputError("rule must cover every instance");
  double total = 0.0;
  for (std::size_t x = 0; x < p.num_instances(); ++x) {
    for (std::size_t y = 0; y < p.num_classes(); ++y) {
      if (p(x, y) > 0.0) total += p(x, y) * score(loss, rule[x], y);
    }
  }
  return total;
}

double closed_form_entropy(const LossKind& loss, const ExplicitDistribution& p) {
  const std::size_t nx = p.num_instances(), ny = p.num_classes();
  double h = 0.0;
  switch (loss.kind()) {
    case LossKind::Kind::ZeroOne: {
      double bayes = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        double best = 0.0;
        for (std::size_t y = 0; y < ny; ++y) best = std::max(best, p(x, y));
        bayes += best;
      }
      return 1.0 - bayes;
    }
    case LossKind::Kind::Log:
      for (std::size_t x = 0; x < nx; ++x) {
        const double px = p.marginal_x(x);
        for (std::size_t y = 0; y < ny; ++y) h += xlog_ratio(p(x, y), px, p(x, y));
      }
      return h;
    case LossKind::Kind::Alpha: {
      const double alpha = loss.alpha_value(), beta = loss.beta();
      double s = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        double inner = 0.0;
        for (std::size_t y = 0; y < ny; ++y) inner += std::pow(p(x, y), alpha);
        s += std::pow(inner, 1.0 / alpha);
      }
      return beta * (1.0 - s);
    }
    case LossKind::Kind::LogRelative: {
      const Vec& p0 = loss.reference();
      if (p0.size() != ny) throw InputError("reference distribution size mismatch");
      for (std::size_t x = 0; x < nx; ++x) {
        const double px = p.marginal_x(x);
        for (std::size_t y = 0; y < ny; ++y) h += xlog_ratio(p(x, y), px * p0[y], p(x, y));
      }
      return h;
    }
  }
  return NAN;
}

double entropy_by_minimization(const LossKind& loss, const ExplicitDistribution& p, double grid_step) {
  const std::size_t steps = lattice_steps(grid_step);
  const std::size_t ny = p.num_classes();
  double total = 0.0;
  for (std::size_t x = 0; x < p.num_instances(); ++x) {
    double best = INFINITY;
    for_each_simplex_point(ny, steps, [&](const Vec& q) {
      double v = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        if (p(x, y) > 0.0) v += p(x, y) * score(loss, q, y);
      }
      best = std::min(best, v);
    });
    total += best;
  }
  return total;
}

}  // namespace mrc
