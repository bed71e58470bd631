#pragma once

#include "mrc/dual.hpp"
#include "mrc/types.hpp"

namespace mrc {

/// min over nonempty C of (1 - sum_{y in C} (Phi(x, y)^T mu + 1)) / |C|.
double phi01_instance(std::span<const double> mu, const FeatureMap& fm, std::span<const double> x);

/// -log sum_y exp(Phi(x, y)^T mu).
double philog_instance(std::span<const double> mu, const FeatureMap& fm, std::span<const double> x);

/// Learning objective when the instance marginal is pinned to the sample:
/// J(mu) = -tau^T mu - (1/n) sum_i phi(mu, x_i) + lambda^T |mu| / sqrt(n),
/// phi = phi01 for ZeroOne (minimax hinge) and philog for Log (logistic loss).
class FixedMarginalObjective {
 public:
  FixedMarginalObjective(LossKind loss, const FeatureMap& fm, const Dataset& data, Vec lambda);

  std::size_t dim() const { return tau_.size(); }
  const LossKind& loss() const { return loss_; }

  double value(std::span<const double> mu) const;

  /// Value plus one subgradient (the gradient of the smooth part plus
  /// lambda * sign(mu) / sqrt(n), sign(0) = 0).
  double value_and_subgradient(std::span<const double> mu, Vec& grad) const;

  /// The part without the L1 term and its gradient (Log only; smooth).
  double smooth_value_and_gradient(std::span<const double> mu, Vec& grad) const;

  /// lambda / sqrt(n), the per-coordinate L1 weight.
  const Vec& l1_weights() const { return l1_; }

 private:
  LossKind loss_;
  ConstraintAtoms atoms_;
  Vec tau_;
  Vec l1_;
  double n_;
};

/// Adversarial 0-1 classifier: minimizes the ZeroOne objective by restarted
/// subgradient steps.
MrcModel train_adversarial01(const Dataset& data, const FeatureMap& fm, std::span<const double> lambda,
                             const SolverConfig& cfg = {});

/// L1-regularized multinomial logistic regression: minimizes the Log objective
/// by accelerated proximal gradient with backtracking. Converged when a step
/// moves no coordinate by more than tol * max(1, |mu|_inf).
MrcModel train_logreg(const Dataset& data, const FeatureMap& fm, std::span<const double> lambda,
                      const SolverConfig& cfg = {});

}  // namespace mrc
