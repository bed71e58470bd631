#include "mrc/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace mrc {

double beta_of_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha == 1.0) {
    throw InputError("alpha must be finite, positive and different from 1");
  }
  return alpha / (alpha - 1.0);
}

LossKind LossKind::zero_one() { return {Kind::ZeroOne, 0.0, {}}; }

LossKind LossKind::log() { return {Kind::Log, 0.0, {}}; }

LossKind LossKind::alpha(double alpha) {
  beta_of_alpha(alpha);
  return {Kind::Alpha, alpha, {}};
}

LossKind LossKind::log_relative(Vec p0) {
  if (p0.size() < 2) throw InputError("reference distribution needs at least two labels");
  double total = 0.0;
  for (double p : p0) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw InputError("reference distribution must be strictly positive");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("reference distribution must sum to 1");
  return {Kind::LogRelative, 0.0, std::move(p0)};
}

LossKind LossKind::parse(const std::string& text) {
  if (text == "zero-one" || text == "0-1") return zero_one();
  if (text == "log") return log();
  if (text.rfind("alpha:", 0) == 0) {
    const std::string number = text.substr(6);
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(number, &used);
    } catch (const std::exception&) {
      throw InputError("bad alpha value in loss '" + text + "'");
    }
    if (used != number.size()) throw InputError("bad alpha value in loss '" + text + "'");
    return alpha(a);
  }
  throw InputError("unknown loss '" + text + "' (expected zero-one, log or alpha:<a>)");
}

double LossKind::alpha_value() const {
  if (kind_ != Kind::Alpha) throw std::logic_error("not an alpha loss");
  return alpha_;
}

double LossKind::beta() const { return beta_of_alpha(alpha_value()); }

const Vec& LossKind::reference() const {
  if (kind_ != Kind::LogRelative) throw std::logic_error("not a log-relative loss");
  return p0_;
}

std::string LossKind::name() const {
  switch (kind_) {
    case Kind::ZeroOne:
      return "zero-one";
    case Kind::Log:
      return "log";
    case Kind::Alpha: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "alpha:%.17g", alpha_);
      return buf;
    }
    case Kind::LogRelative:
      return "log-relative";
  }
  return "unknown";
}

Dataset::Dataset(std::size_t num_dims, std::size_t num_classes, Vec instances,
                 std::vector<int> labels)
    : num_dims_(num_dims),
      num_classes_(num_classes),
      instances_(std::move(instances)),
      labels_(std::move(labels)) {
  if (num_classes_ < 2) throw InputError("need at least two classes");
  if (labels_.empty()) throw InputError("dataset is empty");
  if (instances_.size() != labels_.size() * num_dims_) {
    throw InputError("instance matrix does not match label count");
  }
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) {
      throw InputError("label out of range");
    }
  }
  for (double v : instances_) {
    if (!std::isfinite(v)) throw InputError("non-finite instance value");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Vec rows;
  rows.reserve(indices.size() * num_dims_);
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    rows.insert(rows.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  return Dataset(num_dims_, num_classes_, std::move(rows), std::move(labels));
}

FeatureMap::FeatureMap(std::size_t num_classes, std::size_t num_dims,
                       std::vector<Threshold> thresholds)
    : num_classes_(num_classes), num_dims_(num_dims), thresholds_(std::move(thresholds)) {
  if (num_classes_ < 2) throw InputError("feature map needs at least two classes");
  for (const auto& t : thresholds_) {
    if (t.dim >= num_dims_) throw InputError("threshold dimension out of range");
    if (!std::isfinite(t.value)) throw InputError("non-finite threshold");
  }
}

void FeatureMap::check_row(std::span<const double> x) const {
  if (x.size() != num_dims_) {
    throw InputError("instance has " + std::to_string(x.size()) + " dimensions, feature map expects " +
                     std::to_string(num_dims_));
  }
}

Vec FeatureMap::psi(std::span<const double> x) const {
  check_row(x);
  Vec out(block_size());
  out[0] = 1.0;
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    out[i + 1] = x[thresholds_[i].dim] <= thresholds_[i].value ? 1.0 : 0.0;
  }
  return out;
}

Vec FeatureMap::phi(std::span<const double> x, int y) const {
  if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) throw InputError("label out of range");
  const Vec p = psi(x);
  Vec out(dim(), 0.0);
  std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(y * block_size()));
  return out;
}

Vec FeatureMap::scores(std::span<const double> x, std::span<const double> mu) const {
  if (mu.size() != dim()) throw InputError("parameter vector does not match feature map");
  const Vec p = psi(x);
  Vec out(num_classes_, 0.0);
  const std::size_t k1 = block_size();
  for (std::size_t y = 0; y < num_classes_; ++y) {
    out[y] = dot(p, mu.subspan(y * k1, k1));
  }
  return out;
}

ExpectationBox box_from_bounds(Vec a, Vec b) {
  if (a.size() != b.size()) throw InputError("box endpoints differ in length");
  ExpectationBox box;
  box.tau.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) throw InputError("box lower endpoint exceeds upper endpoint");
    box.tau[i] = 0.5 * (a[i] + b[i]);
  }
  box.a = std::move(a);
  box.b = std::move(b);
  return box;
}

ConstraintAtoms::ConstraintAtoms(std::size_t num_classes, std::size_t dim)
    : num_classes_(num_classes), dim_(dim) {
  if (num_classes_ < 1 || dim_ < 1) throw InputError("atoms need classes and a positive dimension");
}

std::size_t ConstraintAtoms::add(std::span<const double> family, double weight) {
  const std::size_t width = num_classes_ * dim_;
  if (family.size() != width) throw InputError("feature family has wrong length");
  Vec key(family.begin(), family.end());
  auto [it, inserted] = index_.try_emplace(std::move(key), weights_.size());
  if (!inserted) {
    weights_[it->second] += weight;
    return it->second;
  }
  data_.insert(data_.end(), family.begin(), family.end());
  weights_.push_back(weight);
  return weights_.size() - 1;
}

double ConstraintAtoms::total_weight() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

Vec ConstraintAtoms::scores(std::size_t j, std::span<const double> mu) const {
  Vec out(num_classes_);
  scores(j, mu, out);
  return out;
}

void ConstraintAtoms::scores(std::size_t j, std::span<const double> mu, std::span<double> out) const {
  for (std::size_t y = 0; y < num_classes_; ++y) out[y] = dot(vec(j, y), mu);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double linf_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace mrc
