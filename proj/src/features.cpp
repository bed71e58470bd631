#include "mrc/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mrc {
namespace {

double gini_mass(std::span<const double> counts) {
  double total = 0.0, sq = 0.0;
  for (double c : counts) {
    total += c;
    sq += c * c;
  }
  // n * Gini = n - sum c^2 / n
  return total > 0.0 ? total - sq / total : 0.0;
}

struct Leaf {
  std::size_t begin = 0;  // range into the sorted sample order
  std::size_t end = 0;
};

struct Split {
  double decrease = 0.0;
  double threshold = 0.0;
  std::size_t cut = 0;  // first index of the right child
};

// Best split of a contiguous run of (value, label) pairs sorted by value.
Split best_split(std::span<const double> values, std::span<const int> labels, Leaf leaf,
                 std::size_t num_classes) {
  Split best;
  Vec left(num_classes, 0.0), right(num_classes, 0.0);
  for (std::size_t i = leaf.begin; i < leaf.end; ++i) right[labels[i]] += 1.0;
  const double parent = gini_mass(right);
  if (parent <= 0.0) return best;
  for (std::size_t i = leaf.begin; i + 1 < leaf.end; ++i) {
    left[labels[i]] += 1.0;
    right[labels[i]] -= 1.0;
    if (values[i] == values[i + 1]) continue;
    const double decrease = parent - gini_mass(left) - gini_mass(right);
    if (decrease > best.decrease + 1e-12) {
      best.decrease = decrease;
      best.threshold = 0.5 * (values[i] + values[i + 1]);
      best.cut = i + 1;
    }
  }
  return best;
}

std::vector<double> stump_thresholds(const Dataset& data, std::size_t dim, std::size_t max_leaves) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return data.row(i)[dim] < data.row(j)[dim];
  });
  Vec values(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = data.row(order[i])[dim];
    labels[i] = data.label(order[i]);
  }

  // Leaves are contiguous runs of the sorted order, so a split never reorders.
  std::vector<Leaf> leaves{{0, n}};
  std::vector<double> out;
  while (leaves.size() < max_leaves) {
    Split chosen;
    std::size_t chosen_leaf = leaves.size();
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      Split s = best_split(values, labels, leaves[l], data.num_classes());
      if (s.decrease > chosen.decrease + 1e-12) {
        chosen = s;
        chosen_leaf = l;
      }
    }
    if (chosen_leaf == leaves.size()) break;
    const Leaf parent = leaves[chosen_leaf];
    leaves[chosen_leaf] = {parent.begin, chosen.cut};
    leaves.push_back({chosen.cut, parent.end});
    out.push_back(chosen.threshold);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FeatureMap fit_thresholds(const Dataset& data, const StumpSpec& spec) {
  if (spec.max_leaves < 2) throw InputError("max_leaves must be at least 2");
  std::vector<Threshold> thresholds;
  for (std::size_t d = 0; d < data.num_dims(); ++d) {
    for (double t : stump_thresholds(data, d, spec.max_leaves)) thresholds.push_back({d, t});
  }
  return FeatureMap(data.num_classes(), data.num_dims(), std::move(thresholds));
}

ExpectationBox estimate_expectations(const FeatureMap& fm, const Dataset& data,
                                     std::span<const double> lambda) {
  const std::size_t m = fm.dim();
  if (lambda.size() != m) throw InputError("lambda has wrong length");
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("lambda entries must be finite and >= 0");
  }
  if (data.num_classes() != fm.num_classes()) throw InputError("class count mismatch");

  ExpectationBox box;
  box.n = data.size();
  box.tau.assign(m, 0.0);
  const std::size_t k1 = fm.block_size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec psi = fm.psi(data.row(i));
    const std::size_t offset = static_cast<std::size_t>(data.label(i)) * k1;
    for (std::size_t t = 0; t < k1; ++t) box.tau[offset + t] += psi[t];
  }
  const double n = static_cast<double>(data.size());
  const double root_n = std::sqrt(n);
  box.lambda.assign(lambda.begin(), lambda.end());
  box.a.resize(m);
  box.b.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    box.tau[i] /= n;
    box.a[i] = box.tau[i] - lambda[i] / root_n;
    box.b[i] = box.tau[i] + lambda[i] / root_n;
  }
  return box;
}

ExpectationBox estimate_expectations(const FeatureMap& fm, const Dataset& data, double lambda) {
  const Vec l(fm.dim(), lambda);
  return estimate_expectations(fm, data, l);
}

Vec feature_range(const FeatureMap& fm) { return Vec(fm.dim(), 1.0); }

Vec feature_range(const ConstraintAtoms& space) {
  const std::size_t m = space.dim();
  Vec lo(m, INFINITY), hi(m, -INFINITY);
  for (std::size_t j = 0; j < space.size(); ++j) {
    for (std::size_t y = 0; y < space.num_classes(); ++y) {
      auto f = space.vec(j, y);
      for (std::size_t i = 0; i < m; ++i) {
        lo[i] = std::min(lo[i], f[i]);
        hi[i] = std::max(hi[i], f[i]);
      }
    }
  }
  Vec d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = hi[i] - lo[i];
  return d;
}

double hoeffding_scale(std::size_t m, double delta) {
  if (m == 0) throw InputError("feature dimension must be positive");
  if (!(delta > 0.0 && delta <= 2.0)) throw InputError("delta out of range");
  return std::sqrt((std::log(static_cast<double>(m)) + std::log(2.0 / delta)) / 2.0);
}

Vec confidence_lambda(std::span<const double> range, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  const double scale = hoeffding_scale(range.size(), delta);
  Vec out(range.size());
  for (std::size_t i = 0; i < range.size(); ++i) out[i] = range[i] * scale;
  return out;
}

Vec confidence_lambda(const FeatureMap& fm, double delta) {
  return confidence_lambda(feature_range(fm), delta);
}

ConstraintAtoms constraint_atoms(const FeatureMap& fm, const Dataset& data) {
  if (data.num_classes() != fm.num_classes()) throw InputError("class count mismatch");
  ConstraintAtoms atoms(fm.num_classes(), fm.dim());
  const std::size_t k1 = fm.block_size();
  Vec family(fm.num_classes() * fm.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec psi = fm.psi(data.row(i));
    std::fill(family.begin(), family.end(), 0.0);
    for (std::size_t y = 0; y < fm.num_classes(); ++y) {
      std::copy(psi.begin(), psi.end(),
                family.begin() + static_cast<std::ptrdiff_t>(y * fm.dim() + y * k1));
    }
    atoms.add(family);
  }
  return atoms;
}

}  // namespace mrc
