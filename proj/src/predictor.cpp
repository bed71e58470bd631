#include "mrc/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/dual.hpp"

namespace mrc {

Vec zero_one_rule(std::span<const double> scores, double nu) {
  const std::size_t ny = scores.size();
  Vec h(ny);
  double c = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    h[y] = std::max(scores[y] + nu + 1.0, 0.0);
    c += h[y];
  }
  if (c == 0.0) {
    std::fill(h.begin(), h.end(), 1.0 / static_cast<double>(ny));
  } else {
    for (double& v : h) v /= c;
  }
  return h;
}

Vec log_rule(std::span<const double> scores) { return nu_star_log(scores).weights; }

Vec alpha_rule(std::span<const double> scores, double nu, double beta, double tol, AlphaOverflow overflow) {
  const std::size_t ny = scores.size();
  Vec h(ny, 0.0);
  double total = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    const double u = (scores[y] + nu) / beta + 1.0;
    if (u > 0.0) {
      h[y] = std::pow(u, beta);
    } else if (beta < 0.0) {
      h[y] = INFINITY;
    }
    total += h[y];
  }
  if (total > 1.0 + tol || !std::isfinite(total)) {
    if (overflow == AlphaOverflow::Error || !std::isfinite(total)) {
      throw NumericError("alpha rule masses exceed 1: the parameters violate the dual constraint");
    }
    for (double& v : h) v /= total;
    return h;
  }
  if (total > 1.0) {
    for (double& v : h) v /= total;
    return h;
  }
  const double share = (1.0 - total) / static_cast<double>(ny);
  for (double& v : h) v += share;
  return h;
}

Vec fixed_marginal_rule(const LossKind& loss, std::span<const double> scores) {
  switch (loss.kind()) {
    case LossKind::Kind::Log:
      return log_rule(scores);
    case LossKind::Kind::ZeroOne:
      return zero_one_rule(scores, nu_star_zero_one(scores).value);
    default:
      throw InputError("fixed-marginal models support only the zero-one and log losses");
  }
}

Vec rule_from_scores(const MrcModel& model, std::span<const double> scores, AlphaOverflow overflow) {
  if (model.variant == Variant::FixedInstanceMarginal) return fixed_marginal_rule(model.loss, scores);
  if (!model.nu) throw InputError("expectation-only model lacks nu");
  switch (model.loss.kind()) {
    case LossKind::Kind::ZeroOne:
      return zero_one_rule(scores, *model.nu);
    case LossKind::Kind::Log:
      return log_rule(scores);
    case LossKind::Kind::Alpha:
      return alpha_rule(scores, *model.nu, model.loss.beta(), 1e-6, overflow);
    case LossKind::Kind::LogRelative:
      break;
  }
  throw InputError("no prediction rule for the log-relative loss");
}

namespace {

void require(const MrcModel& model, LossKind::Kind kind, Variant variant) {
  if (model.loss.kind() != kind || model.variant != variant) {
    throw InputError("model does not match the requested prediction rule");
  }
}

}  // namespace

Vec predict_zero_one(const MrcModel& model, std::span<const double> x) {
  require(model, LossKind::Kind::ZeroOne, Variant::ExpectationOnly);
  return rule_from_scores(model, model.feature_map.scores(x, model.mu));
}

Vec predict_log(const MrcModel& model, std::span<const double> x) {
  require(model, LossKind::Kind::Log, Variant::ExpectationOnly);
  return log_rule(model.feature_map.scores(x, model.mu));
}

Vec predict_alpha(const MrcModel& model, std::span<const double> x, double tol, AlphaOverflow overflow) {
  require(model, LossKind::Kind::Alpha, Variant::ExpectationOnly);
  return alpha_rule(model.feature_map.scores(x, model.mu), *model.nu, model.loss.beta(), tol, overflow);
}

Vec predict_fixed_marginal(const MrcModel& model, std::span<const double> x) {
  if (model.variant != Variant::FixedInstanceMarginal) throw InputError("model is not a fixed-marginal model");
  return fixed_marginal_rule(model.loss, model.feature_map.scores(x, model.mu));
}

Vec predict_proba(const MrcModel& model, std::span<const double> x, AlphaOverflow overflow) {
  return rule_from_scores(model, model.feature_map.scores(x, model.mu), overflow);
}

std::size_t argmax_label(std::span<const double> h) {
  return static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
}

std::size_t LabelSampler::sample(std::span<const double> h) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t y = 0; y < h.size(); ++y) {
    if (h[y] <= 0.0) continue;
    acc += h[y];
    last = y;
    if (u < acc) return y;
  }
  return last;
}

}  // namespace mrc
