#pragma once

#include <cmath>

#include "mrc/dual.hpp"

namespace mrc::detail {

struct SubgradientResult {
  Vec best;
  double best_value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Restarted normalized subgradient descent from the origin. `oracle(x, grad)`
/// returns the objective at x and writes one subgradient to grad.
template <typename Oracle>
SubgradientResult minimize_subgradient(std::size_t dim, const SolverConfig& cfg, Oracle&& oracle) {
  cfg.validate();
  SubgradientResult out;
  out.best.assign(dim, 0.0);
  Vec x(dim), grad;
  out.best_value = oracle(out.best, grad);
  double scale = cfg.c;

  while (out.iterations < cfg.max_iters && !out.converged) {
    x = out.best;
    for (std::size_t t = 1; t <= cfg.restart_every && out.iterations < cfg.max_iters; ++t, ++out.iterations) {
      const double v = oracle(x, grad);
      if (v < out.best_value) {
        out.best_value = v;
        out.best = x;
      }
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        out.converged = true;
        break;
      }
      const double step =
          cfg.step_rule == StepRule::Diminishing ? scale / std::sqrt(static_cast<double>(t)) : scale;
      for (std::size_t i = 0; i < dim; ++i) x[i] -= step * grad[i] / norm;
    }
    if (!out.converged) {
      const double v = oracle(x, grad);
      if (v < out.best_value) {
        out.best_value = v;
        out.best = x;
      }
    }
    scale *= 0.5;
    if (scale < cfg.tol) out.converged = true;
  }
  return out;
}

}  // namespace mrc::detail
