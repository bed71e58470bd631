#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mrc/dual.hpp"
#include "mrc/types.hpp"

namespace mrc {

/// Method names accepted in experiment configs.
inline const std::vector<std::string> kExperimentMethods = {"mrc-zero-one", "mrc-log", "adv-zero-one", "logreg"};

struct ExperimentConfig {
  std::string dataset;  // resolved against the config file's directory
  std::vector<std::size_t> train_sizes;
  std::size_t repetitions = 1;
  std::string lambda = "0.25";
  std::size_t test_size = 0;  // 0: every row not used for training
  std::size_t max_leaves = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> methods = kExperimentMethods;
  SolverConfig solver;

  /// Parses and validates the JSON schema. Unknown keys are errors.
  static ExperimentConfig from_json(const std::string& text, const std::string& base_dir = ".");
};

/// One trained method on one (n, seed) cell. risk is the method's own loss
/// averaged over the test rows (expected 0-1 loss 1 - h(y|x), or log loss);
/// upper and lower are NaN for methods without bounds.
struct ExperimentRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string method;
  double risk = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

/// Stratified split: n training rows and up to `test_size` test rows (all the
/// rest when 0), each class represented in proportion to its frequency.
struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
TrainTestSplit stratified_split(const std::vector<int>& labels, std::size_t num_classes, std::size_t n,
                                std::size_t test_size, std::uint64_t seed);

/// Runs every (n, repetition) cell on up to `threads` workers. Rows come back
/// ordered by train size, then repetition, then method.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, const Dataset& data, std::size_t threads);

void write_results_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_results_csv(std::istream& in);

/// Worker cap from MRC_THREADS, else the hardware concurrency (at least 1).
std::size_t thread_budget();

}  // namespace mrc
