#pragma once

#include "mrc/types.hpp"

#include <limits>

namespace mrc {

enum class RowSense { LessEqual, GreaterEqual, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus status);

/// Dense linear program: minimize c^T x subject to rows A_i x {<=, >=, =} b_i and
/// lower <= x <= upper. Variables default to [0, +inf).
class LpProblem {
 public:
  explicit LpProblem(std::size_t num_vars);

  std::size_t num_vars() const { return cost_.size(); }
  std::size_t num_rows() const { return rhs_.size(); }

  void set_cost(std::size_t j, double c) { cost_.at(j) = c; }
  void set_objective(std::span<const double> c);
  void set_bounds(std::size_t j, double lower, double upper);
  void set_free(std::size_t j) { set_bounds(j, -kInf, kInf); }

  /// Appends a row; `coeffs` must have num_vars() entries.
  std::size_t add_row(std::span<const double> coeffs, RowSense sense, double rhs);

  const Vec& cost() const { return cost_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  std::span<const double> row(std::size_t i) const {
    return {coeffs_.data() + i * num_vars(), num_vars()};
  }
  RowSense sense(std::size_t i) const { return sense_[i]; }
  double rhs(std::size_t i) const { return rhs_[i]; }

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  Vec cost_, lower_, upper_;
  Vec coeffs_;  // row-major, num_rows x num_vars
  std::vector<RowSense> sense_;
  Vec rhs_;
};

enum class PivotRule {
  Bland,              // smallest-index entering and leaving variables throughout
  DantzigThenBland,   // most negative reduced cost; Bland after a run of degenerate pivots
};

struct LpOptions {
  PivotRule rule = PivotRule::DantzigThenBland;
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-10;
  double feasibility_tol = 1e-8;
  std::size_t degenerate_run = 50;
  std::size_t max_pivots = 2'000'000;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double value = 0.0;
  /// One multiplier per row with value = b^T duals when all variables are
  /// bounded only below by zero. Sign follows c - A^T y >= 0.
  Vec duals;
  std::size_t pivots = 0;
};

/// Two-phase primal simplex on a dense tableau.
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace mrc
