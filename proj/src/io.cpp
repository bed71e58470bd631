#include "mrc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrc/features.hpp"

namespace mrc {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv_table(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    table.header = split_commas(line);
    break;
  }
  if (table.header.empty()) throw InputError(source + ": missing header row");
  for (const auto& name : table.header) {
    if (name.empty()) throw InputError(where(source, line_no) + "empty column name");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != table.header.size()) {
      throw InputError(where(source, line_no) + "expected " + std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    Vec row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw InputError(where(source, line_no) + "column '" + table.header[c] + "' holds '" + cells[c] +
                         "', not a finite number");
      }
      row[c] = *v;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv_table(in, path);
}

LabeledTable read_labeled_csv(const std::string& path) {
  const CsvTable table = read_csv_table(path);
  const auto label_col = table.column("label");
  LabeledTable out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!label_col || c != *label_col) out.feature_names.push_back(table.header[c]);
  }
  out.num_dims = out.feature_names.size();
  out.num_rows = table.rows.size();
  if (label_col) out.labels.emplace();
  for (const Vec& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (label_col && c == *label_col) {
        const double v = row[c];
        if (v != std::floor(v) || v < 1.0 || v > 1e6) throw InputError(path + ": labels must be integers 1..|Y|");
        out.labels->push_back(static_cast<int>(v) - 1);
      } else {
        out.instances.push_back(row[c]);
      }
    }
  }
  return out;
}

Dataset read_dataset_csv(const std::string& path, std::optional<std::size_t> num_classes) {
  LabeledTable table = read_labeled_csv(path);
  if (!table.labels) throw InputError(path + ": no 'label' column");
  if (table.num_rows == 0) throw InputError(path + ": no data rows");
  const int top = *std::max_element(table.labels->begin(), table.labels->end());
  const std::size_t classes = num_classes.value_or(std::max<std::size_t>(2, static_cast<std::size_t>(top) + 1));
  if (static_cast<std::size_t>(top) >= classes) throw InputError(path + ": label exceeds the number of classes");
  return Dataset(table.num_dims, classes, std::move(table.instances), std::move(*table.labels));
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& names) {
  if (!names.empty() && names.size() != data.num_dims()) throw InputError("column names do not match dimensions");
  for (std::size_t d = 0; d < data.num_dims(); ++d) out << (names.empty() ? "x" + std::to_string(d + 1) : names[d]) << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << json(v).dump() << ',';
    out << data.label(i) + 1 << '\n';
  }
}

LambdaPolicy LambdaPolicy::parse(const std::string& text) {
  LambdaPolicy p;
  p.text_ = text;
  const std::string prefix = "theorem3:";
  if (text.rfind(prefix, 0) == 0) {
    const auto delta = parse_number(text.substr(prefix.size()));
    if (!delta || !(*delta > 0.0 && *delta < 1.0)) throw InputError("confidence level must lie in (0, 1): " + text);
    p.kind_ = Kind::Confidence;
    p.value_ = *delta;
    return p;
  }
  if (const auto v = parse_number(text)) {
    if (*v < 0.0) throw InputError("lambda must be nonnegative");
    p.kind_ = Kind::Scalar;
    p.value_ = *v;
    return p;
  }
  std::ifstream probe(text);
  if (!probe) throw InputError("lambda must be a number, theorem3:<delta> or a readable file: " + text);
  p.kind_ = Kind::File;
  return p;
}

std::optional<double> LambdaPolicy::delta() const {
  if (kind_ == Kind::Confidence) return value_;
  return std::nullopt;
}

Vec LambdaPolicy::resolve(const FeatureMap& fm) const {
  switch (kind_) {
    case Kind::Scalar:
      return Vec(fm.dim(), value_);
    case Kind::Confidence:
      return confidence_lambda(fm, value_);
    case Kind::File: {
      std::string content = read_text_file(text_);
      std::replace(content.begin(), content.end(), ',', ' ');
      std::istringstream ss(content);
      Vec out;
      std::string token;
      while (ss >> token) {
        const auto v = parse_number(token);
        if (!v || *v < 0.0) throw InputError(text_ + ": lambda entries must be nonnegative numbers");
        out.push_back(*v);
      }
      if (out.size() != fm.dim()) {
        throw InputError(text_ + ": expected " + std::to_string(fm.dim()) + " lambda entries, found " +
                         std::to_string(out.size()));
      }
      return out;
    }
  }
  return {};
}

namespace {

json thresholds_json(const FeatureMap& fm) {
  json out = json::array();
  for (const auto& t : fm.thresholds()) out.push_back(json::array({t.dim + 1, t.value}));
  return out;
}

std::vector<Threshold> thresholds_from(const json& arr) {
  std::vector<Threshold> out;
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2) throw InputError("threshold entries must be [dim, value]");
    const auto dim = item[0].get<long long>();
    if (dim < 1) throw InputError("threshold dimensions are 1-based");
    out.push_back({static_cast<std::size_t>(dim - 1), item[1].get<double>()});
  }
  return out;
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const StoredModel& stored) {
  const MrcModel& m = stored.model;
  json j;
  j["format_version"] = 1;
  switch (m.loss.kind()) {
    case LossKind::Kind::ZeroOne:
      j["loss"] = "zero-one";
      break;
    case LossKind::Kind::Log:
      j["loss"] = "log";
      break;
    case LossKind::Kind::Alpha:
      j["loss"] = "alpha";
      j["alpha"] = m.loss.alpha_value();
      break;
    case LossKind::Kind::LogRelative:
      throw InputError("log-relative models cannot be stored");
  }
  j["variant"] = m.variant == Variant::ExpectationOnly ? "expectation" : "fixed-marginal";
  j["num_classes"] = m.feature_map.num_classes();
  j["num_dims"] = m.feature_map.num_dims();
  j["thresholds"] = thresholds_json(m.feature_map);
  j["mu"] = m.mu;
  if (m.nu) j["nu"] = *m.nu;
  j["objective_value"] = m.objective_value;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["lambda_policy"] = stored.lambda_policy;
  j["lambda"] = stored.lambda;
  j["n"] = stored.n;
  if (stored.bounds) {
    json b;
    b["upper"] = stored.bounds->upper;
    if (stored.bounds->lower) b["lower"] = *stored.bounds->lower;
    if (stored.bounds->delta) b["delta"] = *stored.bounds->delta;
    json terms = json::object();
    for (const auto& [name, value] : stored.bounds->terms) terms[name] = value;
    b["terms"] = terms;
    j["bounds"] = b;
  }
  return j.dump(2) + "\n";
}

StoredModel model_from_json(const std::string& text) {
  return guarded([&] {
    const json j = json::parse(text);
    if (!j.is_object()) throw InputError("model file must hold a JSON object");
    if (j.at("format_version").get<int>() != 1) throw InputError("unsupported model format_version");
    StoredModel s;
    const std::string loss = j.at("loss").get<std::string>();
    if (loss == "zero-one") {
      s.model.loss = LossKind::zero_one();
    } else if (loss == "log") {
      s.model.loss = LossKind::log();
    } else if (loss == "alpha") {
      s.model.loss = LossKind::alpha(j.at("alpha").get<double>());
    } else {
      throw InputError("unknown loss '" + loss + "' in model");
    }
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "expectation") {
      s.model.variant = Variant::ExpectationOnly;
    } else if (variant == "fixed-marginal") {
      s.model.variant = Variant::FixedInstanceMarginal;
    } else {
      throw InputError("unknown variant '" + variant + "' in model");
    }
    s.model.feature_map = FeatureMap(j.at("num_classes").get<std::size_t>(), j.at("num_dims").get<std::size_t>(),
                                     thresholds_from(j.at("thresholds")));
    s.model.mu = j.at("mu").get<Vec>();
    if (s.model.mu.size() != s.model.feature_map.dim()) throw InputError("mu length does not match the feature map");
    if (j.contains("nu")) s.model.nu = j.at("nu").get<double>();
    if (s.model.variant == Variant::ExpectationOnly && !s.model.nu) throw InputError("model lacks nu");
    s.model.objective_value = j.at("objective_value").get<double>();
    s.model.converged = j.value("converged", true);
    s.model.iterations = j.value("iterations", std::size_t{0});
    s.lambda_policy = j.value("lambda_policy", std::string());
    s.lambda = j.value("lambda", Vec{});
    s.n = j.value("n", std::size_t{0});
    if (j.contains("bounds")) {
      const json& b = j.at("bounds");
      BoundReport r;
      r.upper = b.at("upper").get<double>();
      if (b.contains("lower")) r.lower = b.at("lower").get<double>();
      if (b.contains("delta")) r.delta = b.at("delta").get<double>();
      if (b.contains("terms")) {
        for (const auto& [name, value] : b.at("terms").items()) r.terms.emplace_back(name, value.get<double>());
      }
      s.bounds = r;
    }
    return s;
  });
}

void save_model(const std::string& path, const StoredModel& stored) { write_text_file(path, model_to_json(stored)); }

StoredModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

std::string feature_map_to_json(const FeatureMap& fm) {
  json j;
  j["num_classes"] = fm.num_classes();
  j["num_dims"] = fm.num_dims();
  j["thresholds"] = thresholds_json(fm);
  j["m"] = fm.dim();
  return j.dump(2) + "\n";
}

FeatureMap feature_map_from_json(const std::string& text) {
  return guarded([&] {
    const json j = json::parse(text);
    return FeatureMap(j.at("num_classes").get<std::size_t>(), j.at("num_dims").get<std::size_t>(),
                      thresholds_from(j.at("thresholds")));
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace mrc
