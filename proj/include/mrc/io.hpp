#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mrc/types.hpp"

namespace mrc {

/// Numeric CSV with a header row. Empty cells and non-numeric or non-finite
/// values are input errors.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vec> rows;

  std::optional<std::size_t> column(const std::string& name) const;
};

CsvTable read_csv_table(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv_table(const std::string& path);

/// Instance rows with an optional `label` column (values 1..|Y| in the file).
struct LabeledTable {
  std::vector<std::string> feature_names;
  std::size_t num_dims = 0;
  std::size_t num_rows = 0;
  Vec instances;
  std::optional<std::vector<int>> labels;  // 0-based

  std::size_t size() const { return num_rows; }
  std::span<const double> row(std::size_t i) const { return {instances.data() + i * num_dims, num_dims}; }
};

LabeledTable read_labeled_csv(const std::string& path);

/// Training data: requires the `label` column. |Y| defaults to the largest label.
Dataset read_dataset_csv(const std::string& path, std::optional<std::size_t> num_classes = std::nullopt);

/// Writes columns x1..xD (or `names`) followed by `label` (1-based).
void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& names = {});

/// How the interval widths are chosen: a broadcast scalar, a file of m numbers,
/// or the confidence formula at level delta ("theorem3:<delta>").
class LambdaPolicy {
 public:
  enum class Kind { Scalar, File, Confidence };

  /// A number, "theorem3:<delta>" or a path to a file of whitespace- or comma-separated numbers.
  static LambdaPolicy parse(const std::string& text);

  Kind kind() const { return kind_; }
  const std::string& text() const { return text_; }
  std::optional<double> delta() const;

  Vec resolve(const FeatureMap& fm) const;

 private:
  Kind kind_ = Kind::Scalar;
  std::string text_;
  double value_ = 0.25;
};

/// A model together with the training context persisted beside it.
struct StoredModel {
  MrcModel model;
  std::string lambda_policy;
  Vec lambda;
  std::size_t n = 0;
  std::optional<BoundReport> bounds;
};

std::string model_to_json(const StoredModel& stored);
StoredModel model_from_json(const std::string& text);

void save_model(const std::string& path, const StoredModel& stored);
StoredModel load_model(const std::string& path);

/// Feature map alone (the featurize output).
std::string feature_map_to_json(const FeatureMap& fm);
FeatureMap feature_map_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mrc
