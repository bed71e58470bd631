#pragma once

#include "mrc/types.hpp"

namespace mrc {

/// Per-dimension decision-stump growth limit.
struct StumpSpec {
  std::size_t max_leaves = 20;
};

/// Grows, for every instance dimension on its own, a best-first binary tree on
/// Gini impurity decrease with at most `spec.max_leaves` leaves. Split points are
/// midpoints between consecutive distinct values. The split values of all trees,
/// ordered by dimension and then value, become the thresholds of the map.
FeatureMap fit_thresholds(const Dataset& data, const StumpSpec& spec = {});

/// tau = mean Phi(x_i, y_i); a = tau - lambda / sqrt(n); b = tau + lambda / sqrt(n).
ExpectationBox estimate_expectations(const FeatureMap& fm, const Dataset& data,
                                     std::span<const double> lambda);

/// Same box with a scalar lambda broadcast to every coordinate.
ExpectationBox estimate_expectations(const FeatureMap& fm, const Dataset& data, double lambda);

/// Range max - min of every feature coordinate over X x Y, from the map's
/// structure: the constant slot and every indicator slot take both 0 and 1
/// once labels vary, so each coordinate spans 1.
Vec feature_range(const FeatureMap& fm);

/// Range of every coordinate over an explicitly enumerated instance space.
Vec feature_range(const ConstraintAtoms& space);

/// sqrt((log m + log(2 / delta)) / 2). Accepts delta in (0, 2].
double hoeffding_scale(std::size_t m, double delta);

/// lambda = d * sqrt((log m + log(2 / delta)) / 2), delta in (0, 1). With this
/// width the box contains the true feature mean with probability >= 1 - delta.
Vec confidence_lambda(std::span<const double> range, double delta);

/// confidence_lambda(feature_range(fm), delta).
Vec confidence_lambda(const FeatureMap& fm, double delta);

/// Distinct families {Phi(x_i, y) : y} over the training instances, weighted by
/// how many instances share them.
ConstraintAtoms constraint_atoms(const FeatureMap& fm, const Dataset& data);

}  // namespace mrc
