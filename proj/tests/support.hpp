#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mrc/features.hpp"
#include "mrc/oracle.hpp"
#include "mrc/types.hpp"

namespace mrc::testing {

inline Vec random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// min over nonempty C of (1 - sum_{y in C} (s_y + 1)) / |C| by listing every subset.
inline double subset_nu_zero_one(const Vec& s) {
  const std::size_t ny = s.size();
  double best = INFINITY;
  for (std::size_t mask = 1; mask < (std::size_t{1} << ny); ++mask) {
    double sum = 0.0, size = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      if (mask >> y & 1U) {
        sum += s[y] + 1.0;
        size += 1.0;
      }
    }
    best = std::min(best, (1.0 - sum) / size);
  }
  return best;
}

/// Label-only features (no thresholds): Phi(x, y) = e_y, |X| copies of the same
/// family, box from tau with half-width w on every coordinate.
inline TinyInstance label_only_instance(std::size_t num_instances, std::size_t num_classes) {
  Vec features;
  for (std::size_t x = 0; x < num_instances; ++x) {
    for (std::size_t y = 0; y < num_classes; ++y) {
      for (std::size_t i = 0; i < num_classes; ++i) features.push_back(i == y ? 1.0 : 0.0);
    }
  }
  return TinyInstance(num_instances, num_classes, num_classes, features);
}

/// Threshold-style instance space: |X| points on a line, one indicator per
/// threshold, Phi(x, y) = e_y (x) [1, 1{x <= t_1}, ...].
inline TinyInstance line_instance(std::size_t num_instances, std::size_t num_classes, const Vec& cuts) {
  const std::size_t k1 = cuts.size() + 1, m = num_classes * k1;
  Vec features;
  for (std::size_t x = 0; x < num_instances; ++x) {
    for (std::size_t y = 0; y < num_classes; ++y) {
      Vec f(m, 0.0);
      f[y * k1] = 1.0;
      for (std::size_t t = 0; t < cuts.size(); ++t) {
        f[y * k1 + 1 + t] = static_cast<double>(x) <= cuts[t] ? 1.0 : 0.0;
      }
      features.insert(features.end(), f.begin(), f.end());
    }
  }
  return TinyInstance(num_instances, num_classes, m, features);
}

/// Box around E_p[Phi] for a distribution p on the instance space.
inline ExpectationBox box_around(const TinyInstance& inst, const Vec& p, double half_width) {
  const Vec tau = inst.expectation(p);
  Vec a(tau.size()), b(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    a[i] = tau[i] - half_width;
    b[i] = tau[i] + half_width;
  }
  ExpectationBox box = box_from_bounds(a, b);
  box.tau = tau;
  return box;
}

inline Dataset make_dataset(std::size_t dims, std::size_t classes, const Vec& rows, const std::vector<int>& labels) {
  return Dataset(dims, classes, rows, labels);
}

/// Random dataset with a weak signal on the first coordinate.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dims, std::size_t classes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % classes);
    for (std::size_t d = 0; d < dims; ++d) {
      double v = u(rng);
      if (d == 0) v += 0.5 * y;
      rows.push_back(std::round(v * 8.0) / 8.0);
    }
    labels.push_back(y);
  }
  return Dataset(dims, classes, rows, labels);
}

// Minimax-hinge ERM: max over nonempty C of (|C| - 1 + sum_{y in C} Psi_y) / |C|, with
// Psi_y = (Phi(x_i, y) - Phi(x_i, y_i))^T mu, averaged over the samples, plus L1.
inline double minimax_hinge(const FeatureMap& fm, const Dataset& d, const Vec& mu, const Vec& lambda) {
  const std::size_t ny = d.num_classes();
  double risk = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Vec s = fm.scores(d.row(i), mu);
    const double own = s[static_cast<std::size_t>(d.label(i))];
    double best = -INFINITY;
    for (std::size_t mask = 1; mask < (std::size_t{1} << ny); ++mask) {
      double sum = 0.0, size = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        if (mask >> y & 1U) {
          sum += s[y] - own;
          size += 1.0;
        }
      }
      best = std::max(best, (size - 1.0 + sum) / size);
    }
    risk += best;
  }
  double pen = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) pen += lambda[k] * std::abs(mu[k]);
  return risk / static_cast<double>(d.size()) + pen / std::sqrt(static_cast<double>(d.size()));
}

// Mean negative log-likelihood of the softmax model plus L1.
inline double logistic_erm(const FeatureMap& fm, const Dataset& d, const Vec& mu, const Vec& lambda) {
  double risk = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Vec s = fm.scores(d.row(i), mu);
    const double own = s[static_cast<std::size_t>(d.label(i))];
    double z = 0.0;
    for (double v : s) z += std::exp(v - own);
    risk += std::log(z);
  }
  double pen = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) pen += lambda[k] * std::abs(mu[k]);
  return risk / static_cast<double>(d.size()) + pen / std::sqrt(static_cast<double>(d.size()));
}

}  // namespace mrc::testing
