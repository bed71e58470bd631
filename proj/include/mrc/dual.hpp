#pragma once

#include "mrc/lp.hpp"
#include "mrc/types.hpp"

namespace mrc {

enum class StepRule { Diminishing, Constant };

/// Subgradient solver settings. Steps are normalized: mu <- mu - c_e * s_t * g / |g|,
/// s_t = 1 / sqrt(t) (Diminishing) or 1 (Constant) within an epoch of
/// `restart_every` iterations. Each epoch restarts from the best iterate with
/// c_e halved; the run converges once c_e < tol.
///
/// With `polish`, Log and Alpha runs continue from the subgradient result with
/// accelerated proximal gradient steps on a smoothed max over atoms
/// (temperature lowered from 0.1 to tol). max_iters caps both stages together.
struct SolverConfig {
  std::size_t max_iters = 20000;
  double tol = 1e-6;
  StepRule step_rule = StepRule::Diminishing;
  double c = 1.0;
  std::size_t restart_every = 400;
  double bisection_tol = 1e-10;
  bool polish = true;

  void validate() const;
};

/// nu*(s) for one atom together with the weights w (a probability vector over Y)
/// giving its derivative: d nu* / d s_y = -w_y.
struct NuStar {
  double value = 0.0;
  Vec weights;
};

/// min over nonempty C of (1 - sum_{y in C} (s_y + 1)) / |C|, via a sorted prefix scan.
NuStar nu_star_zero_one(std::span<const double> scores);

/// -log sum_y exp(s_y).
NuStar nu_star_log(std::span<const double> scores);

/// Largest nu with sum_y ((s_y + nu) / beta + 1)_+^beta <= 1, by bisection.
NuStar nu_star_alpha(std::span<const double> scores, double beta, double bisection_tol = 1e-10);

NuStar nu_star(const LossKind& loss, std::span<const double> scores, double bisection_tol = 1e-10);

/// 1/2 (b - a)^T |mu| - 1/2 (b + a)^T mu.
double interval_penalty(const ExpectationBox& box, std::span<const double> mu);

/// -tau^T mu + lambda^T |mu| / sqrt(n).
double regularized_penalty(std::span<const double> tau, std::span<const double> lambda, double n,
                           std::span<const double> mu);

/// F(mu) = interval_penalty(box, mu) - min_j nu*(f_j(.)^T mu). Convex in mu; its
/// minimum is the maximum entropy over the box restricted to the atoms.
class ReducedObjective {
 public:
  ReducedObjective(LossKind loss, ExpectationBox box, ConstraintAtoms atoms, double bisection_tol = 1e-10);

  const LossKind& loss() const { return loss_; }
  const ExpectationBox& box() const { return box_; }
  const ConstraintAtoms& atoms() const { return atoms_; }
  std::size_t dim() const { return box_.dim(); }

  /// nu*(mu, j) for atom j.
  double nu_star(std::span<const double> mu, std::size_t j) const;

  /// min_j nu*(mu, j); `argmin` receives the smallest minimizing atom.
  double min_nu(std::span<const double> mu, std::size_t* argmin = nullptr) const;

  double value(std::span<const double> mu) const;

  /// F(mu) and one subgradient, written to `grad` (resized to dim()). sign(0) = 0
  /// for the |mu| term; ties in min_j go to the smallest j.
  double value_and_subgradient(std::span<const double> mu, Vec& grad) const;

  /// sigma * log sum_j exp(-nu*(mu, j) / sigma), which lies within sigma * log r
  /// above -min_j nu*, and its gradient. `exact` receives F(mu).
  double smoothed_max_and_gradient(std::span<const double> mu, double sigma, Vec& grad, double& exact) const;

 private:
  LossKind loss_;
  ExpectationBox box_;
  ConstraintAtoms atoms_;
  double bisection_tol_;
};

double reduced_value(const ReducedObjective& obj, std::span<const double> mu);

/// Minimizes F by restarted normalized subgradient steps, keeping the best
/// iterate. The returned model has nu = min_j nu*(mu*, j), objective F(mu*), and
/// a feature map that is only meaningful through the overload below.
MrcModel train_mrc(const LossKind& loss, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   const SolverConfig& cfg = {});

MrcModel train_mrc(const LossKind& loss, const FeatureMap& fm, const ExpectationBox& box,
                   const ConstraintAtoms& atoms, const SolverConfig& cfg = {});

/// 0-1 dual as a linear program with one row per atom and nonempty label subset.
/// Requires |Y| <= 12.
MrcModel train_zero_one_exact(const ExpectationBox& box, const ConstraintAtoms& atoms,
                              const LpOptions& options = {});

MrcModel train_zero_one_exact(const FeatureMap& fm, const ExpectationBox& box, const ConstraintAtoms& atoms,
                              const LpOptions& options = {});

/// Largest violation of the dual constraint over the atoms: for Log,
/// max_j log sum_y exp(f_j(y)^T mu + nu); for ZeroOne, max_j sum_y (f_j(y)^T mu + nu + 1)_+ - 1;
/// for Alpha, max_j sum_y ((f_j(y)^T mu + nu) / beta + 1)_+^beta - 1.
double feasibility_residual(const MrcModel& model, const ConstraintAtoms& atoms);

}  // namespace mrc
