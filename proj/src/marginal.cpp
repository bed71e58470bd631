#include "mrc/marginal.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/detail/subgradient.hpp"
#include "mrc/features.hpp"

namespace mrc {

double phi01_instance(std::span<const double> mu, const FeatureMap& fm, std::span<const double> x) {
  return nu_star_zero_one(fm.scores(x, mu)).value;
}

double philog_instance(std::span<const double> mu, const FeatureMap& fm, std::span<const double> x) {
  return nu_star_log(fm.scores(x, mu)).value;
}

FixedMarginalObjective::FixedMarginalObjective(LossKind loss, const FeatureMap& fm, const Dataset& data, Vec lambda)
    : loss_(std::move(loss)), atoms_(constraint_atoms(fm, data)), n_(static_cast<double>(data.size())) {
  if (loss_.kind() != LossKind::Kind::ZeroOne && loss_.kind() != LossKind::Kind::Log) {
    throw InputError("fixed-marginal learning supports only the zero-one and log losses");
  }
  if (lambda.size() != fm.dim()) throw InputError("lambda length does not match the feature map");
  const ExpectationBox box = estimate_expectations(fm, data, lambda);
  tau_ = box.tau;
  l1_.resize(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) l1_[i] = lambda[i] / std::sqrt(n_);
}

double FixedMarginalObjective::smooth_value_and_gradient(std::span<const double> mu, Vec& grad) const {
  const std::size_t m = dim();
  grad.assign(m, 0.0);
  double v = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    v -= tau_[i] * mu[i];
    grad[i] = -tau_[i];
  }
  Vec s(atoms_.num_classes());
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    atoms_.scores(j, mu, s);
    const NuStar phi = nu_star(loss_, s);
    const double w = atoms_.weight(j) / n_;
    v -= w * phi.value;
    for (std::size_t y = 0; y < atoms_.num_classes(); ++y) {
      const double wy = w * phi.weights[y];
      if (wy == 0.0) continue;
      auto f = atoms_.vec(j, y);
      for (std::size_t i = 0; i < m; ++i) grad[i] += wy * f[i];
    }
  }
  return v;
}

double FixedMarginalObjective::value_and_subgradient(std::span<const double> mu, Vec& grad) const {
  double v = smooth_value_and_gradient(mu, grad);
  for (std::size_t i = 0; i < dim(); ++i) {
    v += l1_[i] * std::abs(mu[i]);
    grad[i] += mu[i] > 0.0 ? l1_[i] : (mu[i] < 0.0 ? -l1_[i] : 0.0);
  }
  return v;
}

double FixedMarginalObjective::value(std::span<const double> mu) const {
  Vec grad;
  return value_and_subgradient(mu, grad);
}

namespace {

MrcModel fixed_marginal_model(LossKind loss, const FeatureMap& fm) {
  MrcModel model;
  model.loss = std::move(loss);
  model.variant = Variant::FixedInstanceMarginal;
  model.feature_map = fm;
  return model;
}

Vec soft_threshold(const Vec& z, const Vec& weights, double step) {
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double t = weights[i] * step;
    out[i] = z[i] > t ? z[i] - t : (z[i] < -t ? z[i] + t : 0.0);
  }
  return out;
}

}  // namespace

MrcModel train_adversarial01(const Dataset& data, const FeatureMap& fm, std::span<const double> lambda,
                             const SolverConfig& cfg) {
  const FixedMarginalObjective obj(LossKind::zero_one(), fm, data, Vec(lambda.begin(), lambda.end()));
  const auto run = detail::minimize_subgradient(
      obj.dim(), cfg, [&](const Vec& x, Vec& grad) { return obj.value_and_subgradient(x, grad); });
  MrcModel model = fixed_marginal_model(LossKind::zero_one(), fm);
  model.mu = run.best;
  model.objective_value = run.best_value;
  model.converged = run.converged;
  model.iterations = run.iterations;
  return model;
}

MrcModel train_logreg(const Dataset& data, const FeatureMap& fm, std::span<const double> lambda,
                      const SolverConfig& cfg) {
  cfg.validate();
  const FixedMarginalObjective obj(LossKind::log(), fm, data, Vec(lambda.begin(), lambda.end()));
  const std::size_t m = obj.dim();
  const Vec& l1 = obj.l1_weights();
  auto l1_term = [&](const Vec& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) v += l1[i] * std::abs(x[i]);
    return v;
  };

  Vec x(m, 0.0), x_prev(m, 0.0), y(m, 0.0), grad_y, grad_tmp;
  double lipschitz = 1.0;
  double t = 1.0;
  double current = obj.smooth_value_and_gradient(x, grad_tmp) + l1_term(x);
  bool converged = false;
  bool restarted = false;
  std::size_t iter = 0;

  for (; iter < cfg.max_iters && !converged; ++iter) {
    const double fy = obj.smooth_value_and_gradient(y, grad_y);
    Vec candidate;
    double f_candidate = 0.0;
    for (int tries = 0; tries < 100; ++tries) {
      Vec z(m);
      for (std::size_t i = 0; i < m; ++i) z[i] = y[i] - grad_y[i] / lipschitz;
      candidate = soft_threshold(z, l1, 1.0 / lipschitz);
      f_candidate = obj.smooth_value_and_gradient(candidate, grad_tmp);
      double model_value = fy;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = candidate[i] - y[i];
        model_value += grad_y[i] * d + 0.5 * lipschitz * d * d;
      }
      if (f_candidate <= model_value + 1e-15 * std::max(1.0, std::abs(fy))) break;
      lipschitz *= 2.0;
    }
    const double candidate_value = f_candidate + l1_term(candidate);

    double move = 0.0, size = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      move = std::max(move, std::abs(candidate[i] - x[i]));
      size = std::max(size, std::abs(candidate[i]));
    }

    if (candidate_value > current && !restarted) {
      // Momentum overshoot: restart from the current point without momentum.
      t = 1.0;
      y = x;
      restarted = true;
      continue;
    }
    restarted = false;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    x_prev = x;
    x = candidate;
    current = candidate_value;
    for (std::size_t i = 0; i < m; ++i) y[i] = x[i] + (t - 1.0) / t_next * (x[i] - x_prev[i]);
    t = t_next;
    lipschitz = std::max(lipschitz * 0.9, 1e-8);
    if (move <= cfg.tol * size) converged = true;
  }

  MrcModel model = fixed_marginal_model(LossKind::log(), fm);
  model.mu = x;
  model.objective_value = current;
  model.converged = converged;
  model.iterations = iter;
  return model;
}

}  // namespace mrc
