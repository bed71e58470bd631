#include "mrc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mrc/bounds.hpp"
#include "mrc/entropy.hpp"
#include "mrc/features.hpp"
#include "mrc/io.hpp"
#include "mrc/marginal.hpp"
#include "mrc/predictor.hpp"

namespace mrc {
namespace {

using nlohmann::json;

// Largest-remainder apportionment of `total` across classes with weights `sizes`,
// never exceeding `caps`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes,
                                   const std::vector<std::size_t>& caps) {
  const std::size_t k = sizes.size();
  std::size_t weight = 0;
  for (std::size_t s : sizes) weight += s;
  std::vector<std::size_t> out(k, 0);
  std::vector<double> remainder(k, 0.0);
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[c]) / static_cast<double>(weight);
    out[c] = std::min(caps[c], static_cast<std::size_t>(std::floor(exact)));
    remainder[c] = exact - std::floor(exact);
    used += out[c];
  }
  while (used < total) {
    std::size_t pick = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (out[c] >= caps[c]) continue;
      if (pick == k || remainder[c] > remainder[pick]) pick = c;
    }
    if (pick == k) break;
    ++out[pick];
    remainder[pick] = -1.0;
    ++used;
  }
  return out;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& engine) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t positive_size(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InputError(std::string("config field '") + what + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

LossKind method_loss(const std::string& method) {
  return method == "mrc-log" || method == "logreg" ? LossKind::log() : LossKind::zero_one();
}

double test_risk(const MrcModel& model, const Dataset& test) {
  double total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Vec h = predict_proba(model, test.row(i), AlphaOverflow::Normalize);
    total += score(model.loss, h, static_cast<std::size_t>(test.label(i)));
  }
  return total / static_cast<double>(test.size());
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");
  static const std::vector<std::string> known = {"dataset",    "train_sizes", "repetitions", "lambda", "test_size",
                                                 "max_leaves", "seed",        "methods",     "max_iters"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw InputError("unknown config field '" + key + "'");
  }
  ExperimentConfig cfg;
  if (!j.contains("dataset") || !j["dataset"].is_string()) throw InputError("config needs a 'dataset' path");
  std::filesystem::path data_path(j["dataset"].get<std::string>());
  if (data_path.is_relative()) data_path = std::filesystem::path(base_dir) / data_path;
  cfg.dataset = data_path.string();

  if (!j.contains("train_sizes") || !j["train_sizes"].is_array() || j["train_sizes"].empty()) {
    throw InputError("config needs a nonempty 'train_sizes' array");
  }
  for (const auto& v : j["train_sizes"]) {
    const std::size_t n = positive_size(v, "train_sizes");
    if (n == 0) throw InputError("train sizes must be positive");
    cfg.train_sizes.push_back(n);
  }
  if (!j.contains("repetitions")) throw InputError("config needs 'repetitions'");
  cfg.repetitions = positive_size(j["repetitions"], "repetitions");
  if (cfg.repetitions == 0) throw InputError("repetitions must be positive");
  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    if (l.is_number()) {
      cfg.lambda = l.dump();
    } else if (l.is_string()) {
      cfg.lambda = l.get<std::string>();
    } else {
      throw InputError("config field 'lambda' must be a number or a string");
    }
    LambdaPolicy::parse(cfg.lambda);
  }
  if (j.contains("test_size")) cfg.test_size = positive_size(j["test_size"], "test_size");
  if (j.contains("max_leaves")) {
    cfg.max_leaves = positive_size(j["max_leaves"], "max_leaves");
    if (cfg.max_leaves < 2) throw InputError("max_leaves must be at least 2");
  }
  if (j.contains("seed")) cfg.seed = positive_size(j["seed"], "seed");
  if (j.contains("max_iters")) cfg.solver.max_iters = positive_size(j["max_iters"], "max_iters");
  if (j.contains("methods")) {
    if (!j["methods"].is_array() || j["methods"].empty()) throw InputError("'methods' must be a nonempty array");
    cfg.methods.clear();
    for (const auto& v : j["methods"]) {
      if (!v.is_string()) throw InputError("method names must be strings");
      const std::string name = v.get<std::string>();
      if (std::find(kExperimentMethods.begin(), kExperimentMethods.end(), name) == kExperimentMethods.end()) {
        throw InputError("unknown method '" + name + "'");
      }
      cfg.methods.push_back(name);
    }
  }
  cfg.solver.validate();
  return cfg;
}

TrainTestSplit stratified_split(const std::vector<int>& labels, std::size_t num_classes, std::size_t n,
                                std::size_t test_size, std::uint64_t seed) {
  if (n == 0 || n >= labels.size()) throw InputError("training size must be positive and below the dataset size");
  std::mt19937_64 engine(seed);
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  std::vector<std::size_t> sizes(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    shuffle(by_class[c], engine);
    sizes[c] = by_class[c].size();
  }
  const std::vector<std::size_t> train_counts = apportion(n, sizes, sizes);
  std::vector<std::size_t> left(num_classes);
  std::size_t remaining = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    left[c] = sizes[c] - train_counts[c];
    remaining += left[c];
  }
  const std::size_t want = test_size == 0 ? remaining : std::min(test_size, remaining);
  const std::vector<std::size_t> test_counts = apportion(want, sizes, left);

  TrainTestSplit split;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto& idx = by_class[c];
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_counts[c]));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(train_counts[c]),
                      idx.begin() + static_cast<std::ptrdiff_t>(train_counts[c] + test_counts[c]));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, const Dataset& data, std::size_t threads) {
  const LambdaPolicy policy = LambdaPolicy::parse(cfg.lambda);
  for (std::size_t n : cfg.train_sizes) {
    if (n >= data.size()) throw InputError("train size " + std::to_string(n) + " leaves no test rows");
  }
  const std::size_t cells = cfg.train_sizes.size() * cfg.repetitions;
  const std::size_t per_cell = cfg.methods.size();
  std::vector<ExperimentRow> rows(cells * per_cell);
  std::vector<std::exception_ptr> errors(cells);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t n = cfg.train_sizes[cell / cfg.repetitions];
    const std::uint64_t seed = cfg.seed + cell % cfg.repetitions;
    const TrainTestSplit split =
        stratified_split(data.labels(), data.num_classes(), n, cfg.test_size, seed * 0x9E3779B97F4A7C15ULL ^ n);
    const Dataset train = data.subset(split.train);
    const Dataset test = data.subset(split.test);
    const FeatureMap fm = fit_thresholds(train, StumpSpec{cfg.max_leaves});
    const Vec lambda = policy.resolve(fm);
    const ExpectationBox box = estimate_expectations(fm, train, lambda);
    const ConstraintAtoms atoms = constraint_atoms(fm, train);

    for (std::size_t k = 0; k < per_cell; ++k) {
      const std::string& method = cfg.methods[k];
      ExperimentRow& row = rows[cell * per_cell + k];
      row.n = n;
      row.seed = seed;
      row.method = method;
      row.upper = NAN;
      row.lower = NAN;
      MrcModel model;
      if (method == "mrc-zero-one" || method == "mrc-log") {
        model = method == "mrc-zero-one" && data.num_classes() <= 12
                    ? train_zero_one_exact(fm, box, atoms)
                    : train_mrc(method_loss(method), fm, box, atoms, cfg.solver);
        row.upper = upper_bound(model, box);
        row.lower = lower_bound(model, box, atoms);
      } else if (method == "adv-zero-one") {
        model = train_adversarial01(train, fm, lambda, cfg.solver);
      } else {
        model = train_logreg(train, fm, lambda, cfg.solver);
      }
      row.risk = test_risk(model, test);
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      try {
        run_cell(cell);
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, cells));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
    return json(v).dump();
  };
  out << "n,seed,method,risk,upper,lower\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.seed << ',' << r.method << ',' << num(r.risk) << ',' << num(r.upper) << ','
        << num(r.lower) << '\n';
  }
}

std::vector<ExperimentRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,seed,method,risk,upper,lower") {
    throw InputError("results CSV must start with the header n,seed,method,risk,upper,lower");
  }
  auto real = [](const std::string& cell) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) throw InputError("bad number '" + cell + "' in results");
    return v;
  };
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw InputError("results rows need 6 fields");
    ExperimentRow r;
    r.n = static_cast<std::size_t>(real(cells[0]));
    r.seed = static_cast<std::uint64_t>(std::stoull(cells[1]));
    r.method = cells[2];
    r.risk = real(cells[3]);
    r.upper = real(cells[4]);
    r.lower = real(cells[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::size_t thread_budget() {
  if (const char* env = std::getenv("MRC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw InputError("MRC_THREADS must be a positive integer");
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace mrc
