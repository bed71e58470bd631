#pragma once

#include "mrc/lp.hpp"
#include "mrc/types.hpp"

namespace mrc {

/// r x |Y| table of per-atom losses eps_j(y).
class EpsilonTable {
 public:
  EpsilonTable(std::size_t rows, std::size_t num_classes)
      : rows_(rows), num_classes_(num_classes), values_(rows * num_classes, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t num_classes() const { return num_classes_; }
  double& operator()(std::size_t j, std::size_t y) { return values_[j * num_classes_ + y]; }
  double operator()(std::size_t j, std::size_t y) const { return values_[j * num_classes_ + y]; }

 private:
  std::size_t rows_;
  std::size_t num_classes_;
  Vec values_;
};

/// 1/2 (b - a)^T |mu| - 1/2 (b + a)^T mu - nu for an expectation-only model.
double upper_bound(const MrcModel& model, const ExpectationBox& box);

/// Closed-form eps for ZeroOne and Log models:
/// ZeroOne eps_j(y) = 1 - (f_j(y)^T mu + nu + 1)_+ / c_j (1 - 1/|Y| when c_j = 0),
/// Log eps_j(y) = log sum_i exp(f_j(i)^T mu) - f_j(y)^T mu.
EpsilonTable epsilon_table(const MrcModel& model, const ConstraintAtoms& atoms);

/// eps_j(y) = loss of the model's own prediction at atom j for label y. Works for
/// every loss and both variants.
EpsilonTable rule_loss_table(const MrcModel& model, const ConstraintAtoms& atoms);

enum class BoundForm {
  Distribution,  // optimize over distributions on the atoms with a <= E[f] <= b
  Multiplier,    // the dual in (mu, eta, nu) stated with one row per atom and label
};

/// min_{p in U} E_p[eps]: the largest risk guaranteed for every distribution in the box.
double lower_bound(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   BoundForm form = BoundForm::Distribution, const LpOptions& options = {});

/// Lower bound for the model's own rule. ZeroOne and Log use the closed-form
/// table; Alpha and fixed-marginal models use rule_loss_table.
double lower_bound(const MrcModel& model, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   BoundForm form = BoundForm::Distribution, const LpOptions& options = {});

/// max_{p in U} E_p[eps]: an upper bound on the risk of the rule that produced eps.
double worst_case_risk(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms,
                       BoundForm form = BoundForm::Distribution, const LpOptions& options = {});

/// Labeled generalization terms: "upper" (the bound itself), "slack_true_mean"
/// = 2 |lambda|_inf |mu|_1 / sqrt(n) and "slack_point_estimate" = |lambda|_inf |mu|_1 / sqrt(n).
std::vector<std::pair<std::string, double>> slack_report(double upper, std::span<const double> lambda,
                                                            std::span<const double> mu, std::size_t n);

}  // namespace mrc
