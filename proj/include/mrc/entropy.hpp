#pragma once

#include "mrc/types.hpp"

namespace mrc {

/// Joint distribution on a small finite X x Y, stored densely: probs[x * |Y| + y].
class ExplicitDistribution {
 public:
  ExplicitDistribution(std::size_t num_instances, std::size_t num_classes, Vec probs);

  std::size_t num_instances() const { return num_instances_; }
  std::size_t num_classes() const { return num_classes_; }
  double operator()(std::size_t x, std::size_t y) const { return probs_[x * num_classes_ + y]; }
  double marginal_x(std::size_t x) const;
  double marginal_y(std::size_t y) const;
  const Vec& probs() const { return probs_; }

 private:
  std::size_t num_instances_;
  std::size_t num_classes_;
  Vec probs_;
};

/// Score L(q, y). Log-type scores return +inf when q(y) = 0.
double score(const LossKind& loss, std::span<const double> q, std::size_t y);

/// Mean score of per-instance rule outputs `rule[i]` against the labels of `data`.
double empirical_risk(const LossKind& loss, std::span<const Vec> rule, const Dataset& data);

/// Expected loss of `rule` (one distribution over Y per instance of p) under p.
double expected_loss(const LossKind& loss, std::span<const Vec> rule, const ExplicitDistribution& p);

/// Bayes risk of p in closed form; 0 log 0 = 0.
double closed_form_entropy(const LossKind& loss, const ExplicitDistribution& p);

/// Bayes risk of p by minimizing over a simplex lattice with spacing `grid_step`
/// separately for each instance. Never below the closed form.
double entropy_by_minimization(const LossKind& loss, const ExplicitDistribution& p, double grid_step);

/// Calls fn(point) for every point of {q >= 0, sum q = 1} with coordinates in
/// multiples of 1 / steps.
template <typename Fn>
void for_each_simplex_point(std::size_t cells, std::size_t steps, Fn&& fn);

}  // namespace mrc

#include "mrc/detail/simplex_lattice.hpp"
