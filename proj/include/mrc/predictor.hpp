#pragma once

#include <cstdint>
#include <random>

#include "mrc/types.hpp"

namespace mrc {

/// h(y) = (s_y + nu + 1)_+ / c with c = sum_i (s_i + nu + 1)_+, uniform when c = 0.
Vec zero_one_rule(std::span<const double> scores, double nu);

/// Softmax of the scores.
Vec log_rule(std::span<const double> scores);

/// What to do when the alpha base masses sum above 1 + tol.
enum class AlphaOverflow {
  Error,      // throw NumericError
  Normalize,  // rescale the base masses to sum to 1
};

/// base_y = ((s_y + nu) / beta + 1)_+^beta, h = base + (1 - sum base) / |Y|.
Vec alpha_rule(std::span<const double> scores, double nu, double beta, double tol = 1e-6,
               AlphaOverflow overflow = AlphaOverflow::Error);

/// Rule of a fixed-marginal model: softmax for Log; for ZeroOne the 0-1 rule with
/// nu replaced by the per-instance value min_C (1 - sum_{y in C} (s_y + 1)) / |C|.
Vec fixed_marginal_rule(const LossKind& loss, std::span<const double> scores);

/// Dispatches on loss and variant given the scores Phi(x, .)^T mu.
Vec rule_from_scores(const MrcModel& model, std::span<const double> scores,
                     AlphaOverflow overflow = AlphaOverflow::Error);

Vec predict_zero_one(const MrcModel& model, std::span<const double> x);
Vec predict_log(const MrcModel& model, std::span<const double> x);
Vec predict_alpha(const MrcModel& model, std::span<const double> x, double tol = 1e-6,
                  AlphaOverflow overflow = AlphaOverflow::Error);
Vec predict_fixed_marginal(const MrcModel& model, std::span<const double> x);

/// Any model, any instance.
Vec predict_proba(const MrcModel& model, std::span<const double> x,
                  AlphaOverflow overflow = AlphaOverflow::Error);

/// Index of the largest probability; ties go to the smallest index.
std::size_t argmax_label(std::span<const double> h);

/// Reproducible label draws from rule outputs.
class LabelSampler {
 public:
  explicit LabelSampler(std::uint64_t seed) : engine_(seed) {}
  std::size_t sample(std::span<const double> h);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mrc
