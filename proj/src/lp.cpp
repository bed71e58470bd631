#include "mrc/lp.hpp"

#include <algorithm>
#include <cmath>

namespace mrc {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

LpProblem::LpProblem(std::size_t num_vars)
    : cost_(num_vars, 0.0), lower_(num_vars, 0.0), upper_(num_vars, kInf) {}

void LpProblem::set_objective(std::span<const double> c) {
  if (c.size() != num_vars()) throw InputError("objective length does not match variable count");
  cost_.assign(c.begin(), c.end());
}

void LpProblem::set_bounds(std::size_t j, double lower, double upper) {
  if (j >= num_vars()) throw InputError("variable index out of range");
  if (lower > upper || lower == kInf || upper == -kInf) throw InputError("empty variable bounds");
  lower_[j] = lower;
  upper_[j] = upper;
}

std::size_t LpProblem::add_row(std::span<const double> coeffs, RowSense sense, double rhs) {
  if (coeffs.size() != num_vars()) throw InputError("row length does not match variable count");
  if (!std::isfinite(rhs)) throw InputError("non-finite right-hand side");
  coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  return rhs_.size() - 1;
}

namespace {

// How an original variable maps onto nonnegative tableau columns:
// x = shift + sign * col[first] (- col[second] when split).
struct ColumnMap {
  std::size_t first = 0;
  std::size_t second = SIZE_MAX;
  double shift = 0.0;
  double sign = 1.0;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_(rows * cols, 0.0), rhs_(rows, 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * cols_ + j]; }

  void pivot(std::size_t r, std::size_t e, Vec& reduced, double& objective) {
    double* pr = &t_[r * cols_];
    const double inv = 1.0 / pr[e];
    for (std::size_t j = 0; j < cols_; ++j) pr[j] *= inv;
    rhs_[r] *= inv;
    pr[e] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * cols_];
      const double f = pi[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) pi[j] -= f * pr[j];
      pi[e] = 0.0;
      rhs_[i] -= f * rhs_[r];
    }
    const double de = reduced[e];
    if (de != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) reduced[j] -= de * pr[j];
      reduced[e] = 0.0;
      objective += de * rhs_[r];
    }
    basis_[r] = e;
  }

  std::size_t rows_, cols_;
  Vec t_;
  Vec rhs_;
  std::vector<std::size_t> basis_;
};

struct Outcome {
  LpStatus status;
  std::size_t pivots;
};

// Minimizes the objective encoded by `reduced`/`objective` over columns not in `blocked`.
Outcome run_simplex(Tableau& tab, Vec& reduced, double& objective, const std::vector<char>& blocked,
                    const LpOptions& opt, std::size_t pivot_budget) {
  bool bland = opt.rule == PivotRule::Bland;
  std::size_t degenerate = 0;
  std::size_t pivots = 0;
  while (true) {
    std::size_t enter = tab.cols_;
    if (bland) {
      for (std::size_t j = 0; j < tab.cols_; ++j) {
        if (!blocked[j] && reduced[j] < -opt.optimality_tol) {
          enter = j;
          break;
        }
      }
    } else {
      double most = -opt.optimality_tol;
      for (std::size_t j = 0; j < tab.cols_; ++j) {
        if (!blocked[j] && reduced[j] < most) {
          most = reduced[j];
          enter = j;
        }
      }
    }
    if (enter == tab.cols_) return {LpStatus::Optimal, pivots};
    if (pivots >= pivot_budget) return {LpStatus::IterationLimit, pivots};

    std::size_t leave = tab.rows_;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < tab.rows_; ++i) {
      const double a = tab.at(i, enter);
      if (a <= opt.pivot_tol) continue;
      const double ratio = std::max(tab.rhs_[i], 0.0) / a;
      if (leave == tab.rows_ || ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && tab.basis_[i] < tab.basis_[leave])) {
        if (leave == tab.rows_ || ratio < best_ratio - 1e-12) best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == tab.rows_) return {LpStatus::Unbounded, pivots};

    if (best_ratio <= 1e-12) {
      if (++degenerate >= opt.degenerate_run) bland = true;
    } else {
      degenerate = 0;
    }
    tab.pivot(leave, enter, reduced, objective);
    ++pivots;
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  const std::size_t n = problem.num_vars();
  const double inf = LpProblem::kInf;

  // Map original variables onto nonnegative columns.
  std::vector<ColumnMap> maps(n);
  std::size_t structural = 0;
  struct BoundRow {
    std::size_t col;
    double width;
  };
  std::vector<BoundRow> bound_rows;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = problem.lower()[j], hi = problem.upper()[j];
    ColumnMap& cm = maps[j];
    cm.first = structural++;
    if (lo > -inf) {
      cm.shift = lo;
      if (hi < inf) bound_rows.push_back({cm.first, hi - lo});
    } else if (hi < inf) {
      cm.shift = hi;
      cm.sign = -1.0;
    } else {
      cm.second = structural++;
    }
  }

  const std::size_t m_orig = problem.num_rows();
  const std::size_t m = m_orig + bound_rows.size();

  // Row data in terms of structural columns.
  std::vector<Vec> rows(m, Vec(structural, 0.0));
  Vec rhs(m, 0.0);
  std::vector<RowSense> sense(m, RowSense::LessEqual);
  for (std::size_t i = 0; i < m_orig; ++i) {
    auto a = problem.row(i);
    double b = problem.rhs(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (a[j] == 0.0) continue;
      const ColumnMap& cm = maps[j];
      b -= a[j] * cm.shift;
      rows[i][cm.first] += cm.sign * a[j];
      if (cm.second != SIZE_MAX) rows[i][cm.second] -= a[j];
    }
    rhs[i] = b;
    sense[i] = problem.sense(i);
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    rows[m_orig + k][bound_rows[k].col] = 1.0;
    rhs[m_orig + k] = bound_rows[k].width;
  }

  Vec flip(m, 1.0);
  std::size_t slacks = 0, artificials = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      flip[i] = -1.0;
      rhs[i] = -rhs[i];
      for (double& v : rows[i]) v = -v;
      if (sense[i] == RowSense::LessEqual) {
        sense[i] = RowSense::GreaterEqual;
      } else if (sense[i] == RowSense::GreaterEqual) {
        sense[i] = RowSense::LessEqual;
      }
    }
    if (sense[i] != RowSense::Equal) ++slacks;
    if (sense[i] != RowSense::LessEqual) ++artificials;
  }

  const std::size_t cols = structural + slacks + artificials;
  Tableau tab(m, cols);
  std::vector<std::size_t> identity_col(m);
  std::vector<char> is_artificial(cols, 0);
  {
    std::size_t s = structural, a = structural + slacks;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < structural; ++j) tab.at(i, j) = rows[i][j];
      tab.rhs_[i] = rhs[i];
      switch (sense[i]) {
        case RowSense::LessEqual:
          tab.at(i, s) = 1.0;
          identity_col[i] = s++;
          break;
        case RowSense::GreaterEqual:
          tab.at(i, s++) = -1.0;
          tab.at(i, a) = 1.0;
          is_artificial[a] = 1;
          identity_col[i] = a++;
          break;
        case RowSense::Equal:
          tab.at(i, a) = 1.0;
          is_artificial[a] = 1;
          identity_col[i] = a++;
          break;
      }
      tab.basis_[i] = identity_col[i];
    }
  }

  LpResult result;
  std::size_t budget = options.max_pivots;

  // Phase 1: minimize the sum of artificials.
  if (artificials > 0) {
    Vec reduced(cols, 0.0);
    double objective = 0.0;
    for (std::size_t j = 0; j < cols; ++j) reduced[j] = is_artificial[j] ? 1.0 : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[tab.basis_[i]]) continue;
      for (std::size_t j = 0; j < cols; ++j) reduced[j] -= tab.at(i, j);
      objective += tab.rhs_[i];
    }
    const std::vector<char> none(cols, 0);
    Outcome out = run_simplex(tab, reduced, objective, none, options, budget);
    result.pivots += out.pivots;
    budget -= std::min(budget, out.pivots);
    if (out.status == LpStatus::IterationLimit) {
      result.status = out.status;
      return result;
    }
    double scale = 1.0;
    for (double b : rhs) scale = std::max(scale, std::abs(b));
    if (objective > options.feasibility_tol * scale) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible; rows where
    // that fails are redundant and keep their artificial at zero.
    Vec dummy(cols, 0.0);
    double dummy_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[tab.basis_[i]]) continue;
      std::size_t best = cols;
      double best_abs = options.pivot_tol;
      for (std::size_t j = 0; j < cols; ++j) {
        if (is_artificial[j]) continue;
        if (std::abs(tab.at(i, j)) > best_abs) {
          best_abs = std::abs(tab.at(i, j));
          best = j;
        }
      }
      if (best != cols) {
        tab.pivot(i, best, dummy, dummy_obj);
        ++result.pivots;
      }
    }
  }

  // Phase 2 costs in tableau columns.
  Vec col_cost(cols, 0.0);
  double constant = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double c = problem.cost()[j];
    const ColumnMap& cm = maps[j];
    constant += c * cm.shift;
    col_cost[cm.first] += cm.sign * c;
    if (cm.second != SIZE_MAX) col_cost[cm.second] -= c;
  }
  Vec reduced = col_cost;
  double objective = constant;
  for (std::size_t i = 0; i < m; ++i) {
    const double cb = col_cost[tab.basis_[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) reduced[j] -= cb * tab.at(i, j);
    objective += cb * tab.rhs_[i];
  }
  Outcome out = run_simplex(tab, reduced, objective, is_artificial, options, budget);
  result.pivots += out.pivots;
  result.status = out.status;
  if (out.status != LpStatus::Optimal) return result;

  Vec column_value(cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) column_value[tab.basis_[i]] = std::max(tab.rhs_[i], 0.0);
  result.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ColumnMap& cm = maps[j];
    double v = cm.shift + cm.sign * column_value[cm.first];
    if (cm.second != SIZE_MAX) v -= column_value[cm.second];
    result.x[j] = v;
  }
  result.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.value += problem.cost()[j] * result.x[j];
  result.duals.resize(m_orig);
  for (std::size_t i = 0; i < m_orig; ++i) result.duals[i] = -flip[i] * reduced[identity_col[i]];
  return result;
}

}  // namespace mrc
