#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrc {

using Vec = std::vector<double>;

/// Malformed user input: bad files, flags, shapes, out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric routine failed in a way that signals a bug or an impossible state.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// beta = alpha / (alpha - 1). Rejects alpha in {0, 1}, alpha <= 0 and non-finite alpha.
double beta_of_alpha(double alpha);

/// Classification loss family. Immutable once built; use the named factories.
class LossKind {
 public:
  enum class Kind { ZeroOne, Log, Alpha, LogRelative };

  static LossKind zero_one();
  static LossKind log();
  static LossKind alpha(double alpha);
  /// p0 must be strictly positive and sum to 1 within 1e-12.
  static LossKind log_relative(Vec p0);

  /// Parses "zero-one", "log", "alpha:<a>".
  static LossKind parse(const std::string& text);

  Kind kind() const { return kind_; }
  double alpha_value() const;
  double beta() const;
  const Vec& reference() const;
  std::string name() const;

  bool operator==(const LossKind&) const = default;

 private:
  LossKind(Kind kind, double alpha, Vec p0) : kind_(kind), alpha_(alpha), p0_(std::move(p0)) {}

  Kind kind_ = Kind::ZeroOne;
  double alpha_ = 0.0;
  Vec p0_;
};

/// Training data. Labels are stored 0-based; files and CLI output use 1..|Y|.
class Dataset {
 public:
  Dataset(std::size_t num_dims, std::size_t num_classes, Vec instances, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t num_dims() const { return num_dims_; }
  std::size_t num_classes() const { return num_classes_; }
  std::span<const double> row(std::size_t i) const {
    return {instances_.data() + i * num_dims_, num_dims_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const Vec& instances() const { return instances_; }

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t num_dims_;
  std::size_t num_classes_;
  Vec instances_;
  std::vector<int> labels_;
};

struct Threshold {
  std::size_t dim = 0;  // 0-based column
  double value = 0.0;

  bool operator==(const Threshold&) const = default;
};

/// Phi(x, y) = e_y (x) Psi(x), Psi(x) = [1, 1{x[d_1] <= Th_1}, ..., 1{x[d_k] <= Th_k}].
class FeatureMap {
 public:
  FeatureMap(std::size_t num_classes, std::size_t num_dims, std::vector<Threshold> thresholds);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_dims() const { return num_dims_; }
  const std::vector<Threshold>& thresholds() const { return thresholds_; }
  std::size_t block_size() const { return thresholds_.size() + 1; }
  std::size_t dim() const { return num_classes_ * block_size(); }

  Vec psi(std::span<const double> x) const;
  Vec phi(std::span<const double> x, int y) const;
  /// Phi(x, y)^T mu for every label.
  Vec scores(std::span<const double> x, std::span<const double> mu) const;

  bool operator==(const FeatureMap&) const = default;

 private:
  void check_row(std::span<const double> x) const;

  std::size_t num_classes_;
  std::size_t num_dims_;
  std::vector<Threshold> thresholds_;
};

/// Interval box [a, b] around the empirical feature mean tau.
struct ExpectationBox {
  Vec tau;
  Vec lambda;
  Vec a;
  Vec b;
  std::size_t n = 0;

  std::size_t dim() const { return tau.size(); }
};

/// Box with explicit endpoints (tau = midpoint, lambda and n left empty).
ExpectationBox box_from_bounds(Vec a, Vec b);

/// Distinct feature families {f_j(y) : y in Y}, j = 1..r, with multiplicities.
class ConstraintAtoms {
 public:
  ConstraintAtoms(std::size_t num_classes, std::size_t dim);

  /// `family` holds |Y| consecutive m-vectors. Identical families are merged and
  /// their weights added. Returns the group index.
  std::size_t add(std::span<const double> family, double weight = 1.0);

  std::size_t size() const { return weights_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> vec(std::size_t j, std::size_t y) const {
    return {data_.data() + (j * num_classes_ + y) * dim_, dim_};
  }
  std::span<const double> family(std::size_t j) const {
    return {data_.data() + j * num_classes_ * dim_, num_classes_ * dim_};
  }
  double weight(std::size_t j) const { return weights_[j]; }
  double total_weight() const;

  /// f_j(y)^T mu for every label of group j.
  Vec scores(std::size_t j, std::span<const double> mu) const;
  void scores(std::size_t j, std::span<const double> mu, std::span<double> out) const;

 private:
  std::size_t num_classes_;
  std::size_t dim_;
  Vec data_;
  Vec weights_;
  std::map<Vec, std::size_t> index_;  // exact-equality dedup
};

enum class Variant { ExpectationOnly, FixedInstanceMarginal };

/// A trained classifier: loss, parameters and the feature map they apply to.
struct MrcModel {
  LossKind loss = LossKind::zero_one();
  Variant variant = Variant::ExpectationOnly;
  FeatureMap feature_map{2, 0, {}};
  Vec mu;
  std::optional<double> nu;  // absent for fixed-marginal models
  double objective_value = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

/// Risk certificate shipped with a model.
struct BoundReport {
  double upper = 0.0;
  std::optional<double> lower;
  std::optional<double> delta;
  std::vector<std::pair<std::string, double>> terms;
};

double dot(std::span<const double> a, std::span<const double> b);
double l1_norm(std::span<const double> v);
double linf_norm(std::span<const double> v);

}  // namespace mrc
