#include "mrc/dual.hpp"

#include "mrc/detail/subgradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mrc {

void SolverConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("step scale c must be positive");
  if (restart_every < 1) throw InputError("restart_every must be at least 1");
  if (!(bisection_tol > 0.0)) throw InputError("bisection_tol must be positive");
}

NuStar nu_star_zero_one(std::span<const double> scores) {
  const std::size_t ny = scores.size();
  std::vector<std::size_t> order(ny);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return scores[l] > scores[r]; });
  // Each candidate set is summed in label order so that the value does not
  // depend on how ties in the sort were broken.
  std::vector<char> member(ny, 0);
  double best = INFINITY;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= ny; ++k) {
    member[order[k - 1]] = 1;
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      if (member[y]) sum += scores[y] + 1.0;
    }
    const double v = (1.0 - sum) / static_cast<double>(k);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  NuStar out{best, Vec(ny, 0.0)};
  for (std::size_t k = 0; k < best_k; ++k) out.weights[order[k]] = 1.0 / static_cast<double>(best_k);
  return out;
}

NuStar nu_star_log(std::span<const double> scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  NuStar out{0.0, Vec(scores.size())};
  double total = 0.0;
  for (std::size_t y = 0; y < scores.size(); ++y) {
    out.weights[y] = std::exp(scores[y] - top);
    total += out.weights[y];
  }
  for (double& w : out.weights) w /= total;
  out.value = -(top + std::log(total));
  return out;
}

namespace {

double alpha_constraint(std::span<const double> scores, double beta, double nu) {
  double total = 0.0;
  for (double s : scores) {
    const double u = (s + nu) / beta + 1.0;
    if (u <= 0.0) {
      if (beta < 0.0) return INFINITY;
      continue;
    }
    total += std::pow(u, beta);
  }
  return total;
}

}  // namespace

NuStar nu_star_alpha(std::span<const double> scores, double beta, double bisection_tol) {
  if (!std::isfinite(beta) || beta == 0.0 || (beta > 0.0 && beta <= 1.0)) {
    throw InputError("beta must lie in (-inf, 0) or (1, inf)");
  }
  const double smax = *std::max_element(scores.begin(), scores.end());
  const double smin = *std::min_element(scores.begin(), scores.end());
  double lo, hi;
  if (beta > 0.0) {
    lo = -beta - smax;
    hi = -smin;
  } else {
    hi = -beta - smax;
    double width = 1.0;
    lo = hi - width;
    int doublings = 0;
    while (alpha_constraint(scores, beta, lo) > 1.0) {
      width *= 2.0;
      lo = hi - width;
      if (++doublings > 200) throw NumericError("alpha bisection bracket not found");
    }
  }
  if (!(alpha_constraint(scores, beta, lo) <= 1.0) || !(alpha_constraint(scores, beta, hi) > 1.0)) {
    throw NumericError("alpha bisection bracket does not change sign");
  }
  // Bisection until the bracket is narrow and its right end finite.
  const double coarse = std::max(bisection_tol, 1e-3);
  while (hi - lo > coarse * std::max(1.0, std::abs(lo)) || !std::isfinite(alpha_constraint(scores, beta, hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (alpha_constraint(scores, beta, mid) <= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // The constraint is convex and increasing in nu, so Newton steps from the
  // right end decrease monotonically to the root.
  double x = hi;
  for (int it = 0; it < 100; ++it) {
    const double gap = alpha_constraint(scores, beta, x) - 1.0;
    if (!(gap > 0.0)) break;
    hi = x;
    double slope = 0.0;
    for (double sy : scores) {
      const double u = (sy + x) / beta + 1.0;
      if (u > 0.0) slope += std::pow(u, beta - 1.0);
    }
    const double next = x - gap / slope;
    if (!(next < x) || !(next >= lo)) break;
    x = next;
  }
  for (double nudge = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
       x > lo && alpha_constraint(scores, beta, x) > 1.0; nudge *= 2.0) {
    x -= nudge;
  }
  if (x > lo) lo = x;
  while (hi - lo > bisection_tol * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (alpha_constraint(scores, beta, mid) <= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  NuStar out{lo, Vec(scores.size(), 0.0)};
  double total = 0.0;
  for (std::size_t y = 0; y < scores.size(); ++y) {
    const double u = (scores[y] + lo) / beta + 1.0;
    if (u > 0.0) out.weights[y] = std::pow(u, beta - 1.0);
    total += out.weights[y];
  }
  if (total > 0.0 && std::isfinite(total)) {
    for (double& w : out.weights) w /= total;
  } else {
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    const auto top = std::max_element(scores.begin(), scores.end()) - scores.begin();
    out.weights[static_cast<std::size_t>(top)] = 1.0;
  }
  return out;
}

NuStar nu_star(const LossKind& loss, std::span<const double> scores, double bisection_tol) {
  switch (loss.kind()) {
    case LossKind::Kind::ZeroOne:
      return nu_star_zero_one(scores);
    case LossKind::Kind::Log:
      return nu_star_log(scores);
    case LossKind::Kind::Alpha:
      return nu_star_alpha(scores, loss.beta(), bisection_tol);
    case LossKind::Kind::LogRelative:
      break;
  }
  throw InputError("training is not supported for the log-relative loss");
}

double interval_penalty(const ExpectationBox& box, std::span<const double> mu) {
  if (mu.size() != box.dim()) throw InputError("parameter length does not match box");
  double v = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    v += 0.5 * (box.b[i] - box.a[i]) * std::abs(mu[i]) - 0.5 * (box.b[i] + box.a[i]) * mu[i];
  }
  return v;
}

double regularized_penalty(std::span<const double> tau, std::span<const double> lambda, double n,
                           std::span<const double> mu) {
  if (tau.size() != mu.size() || lambda.size() != mu.size()) throw InputError("length mismatch");
  if (!(n > 0.0)) throw InputError("sample count must be positive");
  const double root = std::sqrt(n);
  double v = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) v += -tau[i] * mu[i] + lambda[i] * std::abs(mu[i]) / root;
  return v;
}

ReducedObjective::ReducedObjective(LossKind loss, ExpectationBox box, ConstraintAtoms atoms, double bisection_tol)
    : loss_(std::move(loss)), box_(std::move(box)), atoms_(std::move(atoms)), bisection_tol_(bisection_tol) {
  if (box_.a.size() != box_.dim() || box_.b.size() != box_.dim()) throw InputError("malformed box");
  if (atoms_.dim() != box_.dim()) throw InputError("atoms and box have different dimensions");
  if (atoms_.size() == 0) throw InputError("no constraint atoms");
  if (loss_.kind() == LossKind::Kind::LogRelative) {
    throw InputError("training is not supported for the log-relative loss");
  }
}

double ReducedObjective::nu_star(std::span<const double> mu, std::size_t j) const {
  return mrc::nu_star(loss_, atoms_.scores(j, mu), bisection_tol_).value;
}

double ReducedObjective::min_nu(std::span<const double> mu, std::size_t* argmin) const {
  Vec s(atoms_.num_classes());
  double best = INFINITY;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    atoms_.scores(j, mu, s);
    const double v = mrc::nu_star(loss_, s, bisection_tol_).value;
    if (v < best) {
      best = v;
      best_j = j;
    }
  }
  if (argmin) *argmin = best_j;
  return best;
}

double ReducedObjective::value(std::span<const double> mu) const {
  return interval_penalty(box_, mu) - min_nu(mu);
}

double ReducedObjective::value_and_subgradient(std::span<const double> mu, Vec& grad) const {
  std::size_t j = 0;
  const double nu = min_nu(mu, &j);
  const NuStar active = mrc::nu_star(loss_, atoms_.scores(j, mu), bisection_tol_);
  const std::size_t m = dim();
  grad.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = mu[i] > 0.0 ? 1.0 : (mu[i] < 0.0 ? -1.0 : 0.0);
    grad[i] = 0.5 * (box_.b[i] - box_.a[i]) * sign - 0.5 * (box_.b[i] + box_.a[i]);
  }
  for (std::size_t y = 0; y < atoms_.num_classes(); ++y) {
    const double w = active.weights[y];
    if (w == 0.0) continue;
    auto f = atoms_.vec(j, y);
    for (std::size_t i = 0; i < m; ++i) grad[i] += w * f[i];
  }
  return interval_penalty(box_, mu) - nu;
}

double ReducedObjective::smoothed_max_and_gradient(std::span<const double> mu, double sigma, Vec& grad,
                                                   double& exact) const {
  const std::size_t r = atoms_.size(), ny = atoms_.num_classes(), m = dim();
  std::vector<NuStar> parts(r);
  Vec s(ny);
  double top = -INFINITY;
  for (std::size_t j = 0; j < r; ++j) {
    atoms_.scores(j, mu, s);
    parts[j] = mrc::nu_star(loss_, s, bisection_tol_);
    top = std::max(top, -parts[j].value);
  }
  double z = 0.0;
  for (const NuStar& p : parts) z += std::exp((-p.value - top) / sigma);
  grad.assign(m, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    const double pj = std::exp((-parts[j].value - top) / sigma) / z;
    if (pj == 0.0) continue;
    for (std::size_t y = 0; y < ny; ++y) {
      const double w = pj * parts[j].weights[y];
      if (w == 0.0) continue;
      auto f = atoms_.vec(j, y);
      for (std::size_t i = 0; i < m; ++i) grad[i] += w * f[i];
    }
  }
  exact = interval_penalty(box_, mu) + top;
  return top + sigma * std::log(z);
}

double reduced_value(const ReducedObjective& obj, std::span<const double> mu) { return obj.value(mu); }

namespace {

// argmin_x t * (w^T |x| - c^T x) + |x - v|^2 / 2 with w = (b - a) / 2, c = (b + a) / 2.
void interval_prox(const ExpectationBox& box, std::span<const double> v, double t, Vec& out) {
  out.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = 0.5 * (box.b[i] - box.a[i]) * t;
    const double u = v[i] + 0.5 * (box.b[i] + box.a[i]) * t;
    out[i] = u > w ? u - w : (u < -w ? u + w : 0.0);
  }
}

struct PolishResult {
  Vec best;
  double best_value;
  bool converged = false;
  std::size_t iterations = 0;
};

// FISTA with backtracking and adaptive restart on the smoothed objective, for a
// decreasing sequence of temperatures. Tracks the best exact value seen.
PolishResult polish(const ReducedObjective& obj, Vec start, double start_value, const SolverConfig& cfg,
                    std::size_t budget) {
  PolishResult out{start, start_value};
  const std::size_t m = obj.dim();
  Vec x = std::move(start), y, next, grad_y, grad_next, v(m);
  double lipschitz = 1.0, exact = 0.0;
  const auto note = [&](const Vec& point, double value) {
    if (value < out.best_value) {
      out.best_value = value;
      out.best = point;
    }
  };
  for (double sigma = 0.1;; sigma = std::max(0.2 * sigma, cfg.tol)) {
    y = x;
    double t = 1.0, previous = INFINITY;
    bool settled = false;
    for (std::size_t k = 0; k < 2000 && out.iterations < budget; ++k, ++out.iterations) {
      const double fy = obj.smoothed_max_and_gradient(y, sigma, grad_y, exact);
      note(y, exact);
      double fn = 0.0;
      for (int tries = 0; tries < 200; ++tries) {
        for (std::size_t i = 0; i < m; ++i) v[i] = y[i] - grad_y[i] / lipschitz;
        interval_prox(obj.box(), v, 1.0 / lipschitz, next);
        fn = obj.smoothed_max_and_gradient(next, sigma, grad_next, exact);
        double model = fy;
        for (std::size_t i = 0; i < m; ++i) {
          const double d = next[i] - y[i];
          model += grad_y[i] * d + 0.5 * lipschitz * d * d;
        }
        if (fn <= model + 1e-12 * std::abs(model)) break;
        lipschitz *= 2.0;
      }
      note(next, exact);
      const double composite = fn + interval_penalty(obj.box(), next);
      if (composite > previous) {
        t = 1.0;
        y = x;
        previous = INFINITY;
        continue;
      }
      double move = 0.0, size = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        move = std::max(move, std::abs(next[i] - x[i]));
        size = std::max(size, std::abs(next[i]));
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < m; ++i) y[i] = next[i] + (t - 1.0) / t_next * (next[i] - x[i]);
      x.swap(next);
      t = t_next;
      previous = composite;
      lipschitz *= 0.9;
      if (move <= cfg.tol * size) {
        settled = true;
        break;
      }
    }
    if (out.iterations >= budget) break;
    if (sigma <= cfg.tol) {
      out.converged = settled;
      break;
    }
  }
  return out;
}

}  // namespace

MrcModel train_mrc(const LossKind& loss, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   const SolverConfig& cfg) {
  const ReducedObjective obj(loss, box, atoms, cfg.bisection_tol);
  const auto run = detail::minimize_subgradient(
      obj.dim(), cfg, [&](const Vec& x, Vec& grad) { return obj.value_and_subgradient(x, grad); });

  MrcModel model;
  model.loss = loss;
  model.variant = Variant::ExpectationOnly;
  model.mu = run.best;
  model.objective_value = run.best_value;
  model.converged = run.converged;
  model.iterations = run.iterations;
  if (cfg.polish && loss.kind() != LossKind::Kind::ZeroOne && run.iterations < cfg.max_iters) {
    const PolishResult refined = polish(obj, run.best, run.best_value, cfg, cfg.max_iters - run.iterations);
    model.mu = refined.best;
    model.objective_value = refined.best_value;
    model.converged = run.converged || refined.converged;
    model.iterations += refined.iterations;
  }
  model.nu = obj.min_nu(model.mu);
  return model;
}

MrcModel train_mrc(const LossKind& loss, const FeatureMap& fm, const ExpectationBox& box,
                   const ConstraintAtoms& atoms, const SolverConfig& cfg) {
  if (fm.dim() != box.dim()) throw InputError("feature map and box have different dimensions");
  MrcModel model = train_mrc(loss, box, atoms, cfg);
  model.feature_map = fm;
  return model;
}

MrcModel train_zero_one_exact(const ExpectationBox& box, const ConstraintAtoms& atoms, const LpOptions& options) {
  const std::size_t ny = atoms.num_classes();
  if (ny > 12) throw InputError("the exact 0-1 solver supports at most 12 classes");
  const ReducedObjective obj(LossKind::zero_one(), box, atoms);
  const std::size_t m = obj.dim();
  const std::size_t nu_col = 2 * m;

  LpProblem lp(2 * m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    lp.set_free(i);
    lp.set_cost(i, -0.5 * (box.b[i] + box.a[i]));
    lp.set_cost(m + i, 0.5 * (box.b[i] - box.a[i]));
  }
  lp.set_free(nu_col);
  lp.set_cost(nu_col, -1.0);

  Vec row(2 * m + 1);
  const std::size_t subsets = (std::size_t{1} << ny) - 1;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t mask = 1; mask <= subsets; ++mask) {
      std::fill(row.begin(), row.end(), 0.0);
      double size = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        if (!(mask >> y & 1U)) continue;
        auto f = atoms.vec(j, y);
        for (std::size_t i = 0; i < m; ++i) row[i] += f[i];
        size += 1.0;
      }
      row[nu_col] = size;
      lp.add_row(row, RowSense::LessEqual, 1.0 - size);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[m + i] = 1.0;
    row[i] = -1.0;
    lp.add_row(row, RowSense::GreaterEqual, 0.0);
    row[i] = 1.0;
    lp.add_row(row, RowSense::GreaterEqual, 0.0);
  }

  const LpResult res = solve_lp(lp, options);
  if (res.status != LpStatus::Optimal) {
    throw NumericError(std::string("0-1 linear program ended with status ") + to_string(res.status));
  }

  MrcModel model;
  model.loss = LossKind::zero_one();
  model.variant = Variant::ExpectationOnly;
  model.mu.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(m));
  model.nu = obj.min_nu(model.mu);
  model.objective_value = obj.value(model.mu);
  model.converged = true;
  model.iterations = res.pivots;
  return model;
}

MrcModel train_zero_one_exact(const FeatureMap& fm, const ExpectationBox& box, const ConstraintAtoms& atoms,
                              const LpOptions& options) {
  if (fm.dim() != box.dim()) throw InputError("feature map and box have different dimensions");
  MrcModel model = train_zero_one_exact(box, atoms, options);
  model.feature_map = fm;
  return model;
}

double feasibility_residual(const MrcModel& model, const ConstraintAtoms& atoms) {
  if (!model.nu) throw InputError("model has no stored nu");
  const double nu = *model.nu;
  double worst = -INFINITY;
  Vec s(atoms.num_classes());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    atoms.scores(j, model.mu, s);
    double v = 0.0;
    switch (model.loss.kind()) {
      case LossKind::Kind::ZeroOne:
        for (double sy : s) v += std::max(sy + nu + 1.0, 0.0);
        v -= 1.0;
        break;
      case LossKind::Kind::Log:
        v = -nu_star_log(s).value + nu;
        break;
      case LossKind::Kind::Alpha:
        v = alpha_constraint(s, model.loss.beta(), nu) - 1.0;
        break;
      case LossKind::Kind::LogRelative:
        throw InputError("no dual constraint for the log-relative loss");
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace mrc
