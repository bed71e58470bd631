#include "mrc/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/entropy.hpp"

namespace mrc {
namespace {

std::size_t steps_of(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InputError("grid step must lie in (0, 1]");
  return static_cast<std::size_t>(std::llround(1.0 / grid_step));
}

}  // namespace

TinyInstance::TinyInstance(std::size_t num_instances, std::size_t num_classes, std::size_t dim, Vec features)
    : num_instances_(num_instances), num_classes_(num_classes), dim_(dim), features_(std::move(features)) {
  if (num_instances_ == 0 || num_classes_ < 2 || dim_ == 0) throw InputError("degenerate instance space");
  if (features_.size() != num_instances_ * num_classes_ * dim_) throw InputError("feature table has wrong size");
  for (double v : features_) {
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  }
}

double TinyInstance::phi_sup() const { return linf_norm(features_); }

ConstraintAtoms TinyInstance::atoms() const {
  ConstraintAtoms atoms(num_classes_, dim_);
  for (std::size_t x = 0; x < num_instances_; ++x) {
    atoms.add({features_.data() + x * num_classes_ * dim_, num_classes_ * dim_});
  }
  return atoms;
}

Vec TinyInstance::expectation(std::span<const double> p) const {
  Vec e(dim_, 0.0);
  for (std::size_t c = 0; c < num_instances_ * num_classes_; ++c) {
    if (p[c] == 0.0) continue;
    const double* f = features_.data() + c * dim_;
    for (std::size_t i = 0; i < dim_; ++i) e[i] += p[c] * f[i];
  }
  return e;
}

std::vector<Vec> feasible_lattice(const TinyInstance& inst, const ExpectationBox& box,
                                  const std::optional<Vec>& marginal, double grid_step) {
  const std::size_t steps = steps_of(grid_step);
  if (box.a.size() != inst.dim() || box.b.size() != inst.dim()) throw InputError("box does not match instance");
  if (marginal && marginal->size() != inst.num_instances()) throw InputError("marginal has wrong length");
  const double slack = grid_step * inst.phi_sup();
  const std::size_t ny = inst.num_classes();
  std::vector<Vec> out;
  for_each_simplex_point(inst.num_instances() * ny, steps, [&](const Vec& p) {
    if (marginal) {
      for (std::size_t x = 0; x < inst.num_instances(); ++x) {
        double px = 0.0;
        for (std::size_t y = 0; y < ny; ++y) px += p[x * ny + y];
        if (std::abs(px - (*marginal)[x]) > grid_step + 1e-12) return;
      }
    }
    const Vec e = inst.expectation(p);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] < box.a[i] - slack - 1e-12 || e[i] > box.b[i] + slack + 1e-12) return;
    }
    out.push_back(p);
  });
  return out;
}

double brute_force_max_entropy(const LossKind& loss, const TinyInstance& inst, const ExpectationBox& box,
                               const std::optional<Vec>& marginal, double grid_step) {
  double best = -INFINITY;
  for (Vec& p : feasible_lattice(inst, box, marginal, grid_step)) {
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    const ExplicitDistribution dist(inst.num_instances(), inst.num_classes(), std::move(p));
    best = std::max(best, closed_form_entropy(loss, dist));
  }
  return best;
}

double exhaustive_minimax(const LossKind& loss, const TinyInstance& inst, const ExpectationBox& box,
                          const std::optional<Vec>& marginal, double rule_step, double dist_step) {
  const std::vector<Vec> points = feasible_lattice(inst, box, marginal, dist_step);
  if (points.empty()) return -INFINITY;
  const std::size_t nx = inst.num_instances(), ny = inst.num_classes();

  std::vector<Vec> conditionals;
  for_each_simplex_point(ny, steps_of(rule_step), [&](const Vec& q) { conditionals.push_back(q); });
  // Loss table per conditional: loss of q at every label.
  std::vector<Vec> losses;
  for (const Vec& q : conditionals) {
    Vec l(ny);
    for (std::size_t y = 0; y < ny; ++y) l[y] = score(loss, q, y);
    losses.push_back(std::move(l));
  }

  const std::size_t per = conditionals.size();
  std::vector<std::size_t> choice(nx, 0);
  Vec eps(nx * ny);
  double best = INFINITY;
  while (true) {
    for (std::size_t x = 0; x < nx; ++x) {
      std::copy(losses[choice[x]].begin(), losses[choice[x]].end(), eps.begin() + static_cast<std::ptrdiff_t>(x * ny));
    }
    double worst = -INFINITY;
    for (const Vec& p : points) {
      double v = 0.0;
      for (std::size_t c = 0; c < nx * ny; ++c) {
        if (p[c] > 0.0) v += p[c] * eps[c];
      }
      worst = std::max(worst, v);
      if (worst >= best) break;
    }
    best = std::min(best, worst);

    std::size_t x = 0;
    while (x < nx && ++choice[x] == per) choice[x++] = 0;
    if (x == nx) break;
  }
  return best;
}

}  // namespace mrc
