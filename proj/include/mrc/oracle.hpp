#pragma once

#include <optional>

#include "mrc/types.hpp"

namespace mrc {

/// Explicit finite instance space with feature vectors Phi(x, y), x < |X|, y < |Y|.
class TinyInstance {
 public:
  /// `features` holds |X| * |Y| consecutive m-vectors, instance-major.
  TinyInstance(std::size_t num_instances, std::size_t num_classes, std::size_t dim, Vec features);

  std::size_t num_instances() const { return num_instances_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> phi(std::size_t x, std::size_t y) const {
    return {features_.data() + (x * num_classes_ + y) * dim_, dim_};
  }
  /// Largest absolute feature value.
  double phi_sup() const;

  /// Every instance as a constraint atom, so the dual solvers see all of X.
  ConstraintAtoms atoms() const;

  /// E_p[Phi] for p stored row-major over (x, y).
  Vec expectation(std::span<const double> p) const;

 private:
  std::size_t num_instances_;
  std::size_t num_classes_;
  std::size_t dim_;
  Vec features_;
};

/// Lattice distributions of step `grid_step` over X x Y with
/// a - s <= E_p[Phi] <= b + s, s = grid_step * phi_sup(), and, when a marginal
/// is given, |p(x) - marginal(x)| <= grid_step. Each point is row-major over (x, y).
std::vector<Vec> feasible_lattice(const TinyInstance& inst, const ExpectationBox& box,
                                  const std::optional<Vec>& marginal, double grid_step);

/// Largest closed-form entropy over feasible_lattice; -inf when no point survives.
double brute_force_max_entropy(const LossKind& loss, const TinyInstance& inst, const ExpectationBox& box,
                               const std::optional<Vec>& marginal, double grid_step);

/// min over lattice rules (step rule_step per instance) of the max expected loss
/// over feasible_lattice(dist_step).
double exhaustive_minimax(const LossKind& loss, const TinyInstance& inst, const ExpectationBox& box,
                          const std::optional<Vec>& marginal, double rule_step, double dist_step);

}  // namespace mrc
