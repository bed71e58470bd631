#include "mrc/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/dual.hpp"
#include "mrc/entropy.hpp"
#include "mrc/predictor.hpp"

namespace mrc {

double upper_bound(const MrcModel& model, const ExpectationBox& box) {
  if (!model.nu) throw InputError("upper bound needs an expectation-only model");
  return interval_penalty(box, model.mu) - *model.nu;
}

EpsilonTable epsilon_table(const MrcModel& model, const ConstraintAtoms& atoms) {
  if (model.variant != Variant::ExpectationOnly || !model.nu) {
    throw InputError("closed-form epsilon needs an expectation-only model");
  }
  const std::size_t ny = atoms.num_classes();
  EpsilonTable eps(atoms.size(), ny);
  Vec s(ny);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    atoms.scores(j, model.mu, s);
    switch (model.loss.kind()) {
      case LossKind::Kind::ZeroOne: {
        double c = 0.0;
        for (double v : s) c += std::max(v + *model.nu + 1.0, 0.0);
        for (std::size_t y = 0; y < ny; ++y) {
          eps(j, y) = c == 0.0 ? 1.0 - 1.0 / static_cast<double>(ny)
                               : 1.0 - std::max(s[y] + *model.nu + 1.0, 0.0) / c;
        }
        break;
      }
      case LossKind::Kind::Log: {
        const double lse = -nu_star_log(s).value;
        for (std::size_t y = 0; y < ny; ++y) eps(j, y) = lse - s[y];
        break;
      }
      default:
        throw InputError("closed-form epsilon exists only for the zero-one and log losses");
    }
  }
  return eps;
}

EpsilonTable rule_loss_table(const MrcModel& model, const ConstraintAtoms& atoms) {
  const std::size_t ny = atoms.num_classes();
  EpsilonTable eps(atoms.size(), ny);
  Vec s(ny);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    atoms.scores(j, model.mu, s);
    const Vec h = rule_from_scores(model, s, AlphaOverflow::Normalize);
    for (std::size_t y = 0; y < ny; ++y) eps(j, y) = score(model.loss, h, y);
  }
  return eps;
}

namespace {

void check_shapes(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms) {
  if (eps.rows() != atoms.size() || eps.num_classes() != atoms.num_classes()) {
    throw InputError("epsilon table does not match the atoms");
  }
  if (box.dim() != atoms.dim() || box.a.size() != box.dim() || box.b.size() != box.dim()) {
    throw InputError("box does not match the atoms");
  }
}

void require_finite_box(const ExpectationBox& box) {
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (!std::isfinite(box.a[i]) || !std::isfinite(box.b[i])) {
      throw InputError("the multiplier form needs a finite box");
    }
  }
}

// Distributions on the atoms with a <= E[f] <= b, objective sign * E[eps].
// Cells with infinite eps are pinned to zero mass.
LpProblem distribution_lp(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms,
                          double sign) {
  const std::size_t ny = atoms.num_classes(), r = atoms.size(), m = atoms.dim();
  const std::size_t cells = r * ny;
  LpProblem lp(cells);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t c = j * ny + y;
      if (std::isfinite(eps(j, y))) {
        lp.set_cost(c, sign * eps(j, y));
      } else {
        lp.set_bounds(c, 0.0, 0.0);
      }
    }
  }
  Vec row(cells, 1.0);
  lp.add_row(row, RowSense::Equal, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t y = 0; y < ny; ++y) row[j * ny + y] = atoms.vec(j, y)[i];
    }
    const double a = box.a[i], b = box.b[i];
    if (a == b) {
      lp.add_row(row, RowSense::Equal, a);
      continue;
    }
    if (std::isfinite(a)) lp.add_row(row, RowSense::GreaterEqual, a);
    if (std::isfinite(b)) lp.add_row(row, RowSense::LessEqual, b);
  }
  return lp;
}

double solve_or_throw(const LpProblem& lp, const LpOptions& options, const char* what) {
  const LpResult res = solve_lp(lp, options);
  if (res.status != LpStatus::Optimal) {
    throw NumericError(std::string(what) + " linear program ended with status " + to_string(res.status));
  }
  return res.value;
}

bool has_infinite(const EpsilonTable& eps) {
  for (std::size_t j = 0; j < eps.rows(); ++j) {
    for (std::size_t y = 0; y < eps.num_classes(); ++y) {
      if (!std::isfinite(eps(j, y))) return true;
    }
  }
  return false;
}

}  // namespace

double lower_bound(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   BoundForm form, const LpOptions& options) {
  check_shapes(eps, box, atoms);
  if (form == BoundForm::Distribution) {
    return solve_or_throw(distribution_lp(eps, box, atoms, 1.0), options, "lower-bound");
  }
  require_finite_box(box);
  const std::size_t m = atoms.dim(), ny = atoms.num_classes();
  const std::size_t nu_col = 2 * m;
  LpProblem lp(2 * m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    lp.set_free(i);
    lp.set_cost(i, -0.5 * (box.b[i] + box.a[i]));
    lp.set_cost(m + i, 0.5 * (box.b[i] - box.a[i]));
  }
  lp.set_free(nu_col);
  lp.set_cost(nu_col, -1.0);
  Vec row(2 * m + 1, 0.0);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (!std::isfinite(eps(j, y))) continue;
      std::fill(row.begin(), row.end(), 0.0);
      auto f = atoms.vec(j, y);
      std::copy(f.begin(), f.end(), row.begin());
      row[nu_col] = 1.0;
      lp.add_row(row, RowSense::LessEqual, eps(j, y));
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
  return -solve_or_throw(lp, options, "lower-bound");
}

double lower_bound(const MrcModel& model, const ExpectationBox& box, const ConstraintAtoms& atoms,
                   BoundForm form, const LpOptions& options) {
  const bool closed_form = model.variant == Variant::ExpectationOnly &&
                           (model.loss.kind() == LossKind::Kind::ZeroOne || model.loss.kind() == LossKind::Kind::Log);
  const EpsilonTable eps = closed_form ? epsilon_table(model, atoms) : rule_loss_table(model, atoms);
  return lower_bound(eps, box, atoms, form, options);
}

double worst_case_risk(const EpsilonTable& eps, const ExpectationBox& box, const ConstraintAtoms& atoms,
                       BoundForm form, const LpOptions& options) {
  check_shapes(eps, box, atoms);
  if (form == BoundForm::Distribution) {
    if (has_infinite(eps)) {
      // Any feasible mass on an infinite-loss cell makes the risk unbounded.
      const std::size_t ny = atoms.num_classes();
      EpsilonTable indicator(eps.rows(), ny);
      for (std::size_t j = 0; j < eps.rows(); ++j) {
        for (std::size_t y = 0; y < ny; ++y) indicator(j, y) = std::isfinite(eps(j, y)) ? 0.0 : 1.0;
      }
      const double mass = -solve_or_throw(distribution_lp(indicator, box, atoms, -1.0), options, "worst-case");
      if (mass > options.feasibility_tol) return INFINITY;
    }
    return -solve_or_throw(distribution_lp(eps, box, atoms, -1.0), options, "worst-case");
  }
  require_finite_box(box);
  if (has_infinite(eps)) return INFINITY;
  const std::size_t m = atoms.dim(), ny = atoms.num_classes();
  const std::size_t nu_col = 2 * m;
  // Variables: mu_a (m, >= 0), mu_b (m, >= 0), nu free.
  LpProblem lp(2 * m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    lp.set_cost(i, -box.a[i]);
    lp.set_cost(m + i, box.b[i]);
  }
  lp.set_free(nu_col);
  lp.set_cost(nu_col, -1.0);
  Vec row(2 * m + 1, 0.0);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t y = 0; y < ny; ++y) {
      auto f = atoms.vec(j, y);
      for (std::size_t i = 0; i < m; ++i) {
        row[i] = f[i];
        row[m + i] = -f[i];
      }
      row[nu_col] = 1.0;
      lp.add_row(row, RowSense::LessEqual, -eps(j, y));
    }
  }
  return solve_or_throw(lp, options, "worst-case");
}

std::vector<std::pair<std::string, double>> slack_report(double upper, std::span<const double> lambda,
                                                         std::span<const double> mu, std::size_t n) {
  if (n == 0) throw InputError("sample count must be positive");
  const double base = linf_norm(lambda) * l1_norm(mu) / std::sqrt(static_cast<double>(n));
  return {{"upper", upper}, {"slack_true_mean", 2.0 * base}, {"slack_point_estimate", base}};
}

}  // namespace mrc
