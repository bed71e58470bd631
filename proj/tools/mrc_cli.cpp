#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mrc/bounds.hpp"
#include "mrc/dual.hpp"
#include "mrc/entropy.hpp"
#include "mrc/experiment.hpp"
#include "mrc/features.hpp"
#include "mrc/io.hpp"
#include "mrc/marginal.hpp"
#include "mrc/oracle.hpp"
#include "mrc/predictor.hpp"

using namespace mrc;
using nlohmann::json;

namespace {

constexpr int kInputExit = 2;
constexpr int kNumericExit = 3;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

// Instance rows checked against the model's feature map.
LabeledTable read_instances(const std::string& path, const MrcModel& model) {
  LabeledTable table = read_labeled_csv(path);
  if (table.num_dims != model.feature_map.num_dims()) {
    throw InputError(path + ": " + std::to_string(table.num_dims) + " feature columns, the model expects " +
                     std::to_string(model.feature_map.num_dims()));
  }
  if (table.labels) {
    for (int y : *table.labels) {
      if (static_cast<std::size_t>(y) >= model.feature_map.num_classes()) {
        throw InputError(path + ": label exceeds the model's number of classes");
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------- featurize

struct FeaturizeArgs {
  std::string data;
  std::size_t max_leaves = 20;
  std::string out;
};

int run_featurize(const FeaturizeArgs& a) {
  const Dataset data = read_dataset_csv(a.data);
  emit(a.out, feature_map_to_json(fit_thresholds(data, StumpSpec{a.max_leaves})));
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string loss = "zero-one";
  std::string lambda = "0.25";
  std::string variant = "expectation";
  std::string solver = "auto";
  std::size_t max_leaves = 20;
  std::optional<std::size_t> num_classes;
  bool lower = false;
  bool strict = false;
  std::size_t max_iters = SolverConfig{}.max_iters;
  double tol = SolverConfig{}.tol;
  std::string out;
};

int run_train(const TrainArgs& a) {
  const LossKind loss = LossKind::parse(a.loss);
  const LambdaPolicy policy = LambdaPolicy::parse(a.lambda);
  if (a.variant != "expectation" && a.variant != "fixed-marginal") {
    throw InputError("--variant must be expectation or fixed-marginal");
  }
  if (a.solver != "auto" && a.solver != "subgradient" && a.solver != "lp") {
    throw InputError("--solver must be auto, subgradient or lp");
  }
  if (a.solver == "lp" && (loss.kind() != LossKind::Kind::ZeroOne || a.variant != "expectation")) {
    throw InputError("--solver lp applies only to the zero-one loss with the expectation variant");
  }
  SolverConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  cfg.validate();

  const Dataset data = read_dataset_csv(a.data, a.num_classes);
  const FeatureMap fm = fit_thresholds(data, StumpSpec{a.max_leaves});
  const Vec lambda = policy.resolve(fm);

  StoredModel stored;
  stored.lambda_policy = policy.text();
  stored.lambda = lambda;
  stored.n = data.size();

  if (a.variant == "fixed-marginal") {
    switch (loss.kind()) {
      case LossKind::Kind::ZeroOne:
        stored.model = train_adversarial01(data, fm, lambda, cfg);
        break;
      case LossKind::Kind::Log:
        stored.model = train_logreg(data, fm, lambda, cfg);
        break;
      default:
        throw InputError("the fixed-marginal variant supports only the zero-one and log losses");
    }
    std::cout << "objective " << num(stored.model.objective_value) << "\n";
  } else {
    const ExpectationBox box = estimate_expectations(fm, data, lambda);
    const ConstraintAtoms atoms = constraint_atoms(fm, data);
    const bool use_lp = a.solver == "lp" || (a.solver == "auto" && loss.kind() == LossKind::Kind::ZeroOne &&
                                             data.num_classes() <= 12);
    stored.model = use_lp ? train_zero_one_exact(fm, box, atoms) : train_mrc(loss, fm, box, atoms, cfg);
    BoundReport report;
    report.upper = upper_bound(stored.model, box);
    report.delta = policy.delta();
    if (a.lower) report.lower = lower_bound(stored.model, box, atoms);
    report.terms = slack_report(report.upper, lambda, stored.model.mu, data.size());
    stored.bounds = report;
    std::cout << "upper_bound " << num(report.upper) << "\n";
    if (report.lower) std::cout << "lower_bound " << num(*report.lower) << "\n";
    for (const auto& [name, value] : report.terms) {
      if (name != "upper") std::cout << name << " " << num(value) << "\n";
    }
  }
  std::cout << "converged " << (stored.model.converged ? "true" : "false") << "\n";
  std::cout << "iterations " << stored.model.iterations << "\n";
  if (!a.out.empty()) save_model(a.out, stored);
  if (a.strict && !stored.model.converged) {
    std::cerr << "error: solver did not converge within " << a.max_iters << " iterations\n";
    return kNumericExit;
  }
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::uint64_t seed = 0;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  const StoredModel stored = load_model(a.model);
  const MrcModel& model = stored.model;
  const LabeledTable table = read_instances(a.data, model);
  const std::size_t ny = model.feature_map.num_classes();
  const bool sample = model.loss.kind() == LossKind::Kind::ZeroOne;
  LabelSampler sampler(a.seed);
  std::ostringstream out;
  out << "label";
  for (std::size_t y = 1; y <= ny; ++y) out << ",p" << y;
  out << "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Vec h = predict_proba(model, table.row(i), AlphaOverflow::Normalize);
    out << (sample ? sampler.sample(h) : argmax_label(h)) + 1;
    for (double v : h) out << "," << num(v);
    out << "\n";
  }
  emit(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string data;
  bool bounds = false;
};

int run_eval(const EvalArgs& a) {
  const StoredModel stored = load_model(a.model);
  const MrcModel& model = stored.model;
  const LabeledTable table = read_instances(a.data, model);
  if (!table.labels) throw InputError(a.data + ": eval needs a 'label' column");
  const std::size_t ny = model.feature_map.num_classes();
  std::vector<Vec> rule;
  for (std::size_t i = 0; i < table.size(); ++i) rule.push_back(predict_proba(model, table.row(i), AlphaOverflow::Normalize));
  const Dataset data(table.num_dims, ny, table.instances, *table.labels);

  std::vector<std::pair<std::string, LossKind>> losses{{"zero_one_risk", LossKind::zero_one()},
                                                       {"log_risk", LossKind::log()}};
  if (model.loss.kind() == LossKind::Kind::Alpha) losses.emplace_back("alpha_risk", model.loss);
  for (const auto& [name, loss] : losses) std::cout << name << " " << num(empirical_risk(loss, rule, data)) << "\n";
  const double own = empirical_risk(model.loss, rule, data);
  std::cout << "risk " << num(own) << "\n";
  if (a.bounds) {
    if (!stored.bounds) throw InputError(a.model + ": the model carries no bounds");
    const BoundReport& b = *stored.bounds;
    if (b.lower) std::cout << "lower_bound " << num(*b.lower) << "\n";
    std::cout << "upper_bound " << num(b.upper) << "\n";
    const bool inside = own <= b.upper + 1e-12 && (!b.lower || *b.lower <= own + 1e-12);
    std::cout << "within_bounds " << (inside ? "true" : "false") << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs {
  std::string model;
  std::string data;
  std::optional<std::string> lambda;
};

int run_bounds(const BoundsArgs& a) {
  const StoredModel stored = load_model(a.model);
  const MrcModel& model = stored.model;
  const LabeledTable table = read_instances(a.data, model);
  if (!table.labels) throw InputError(a.data + ": bounds needs the labeled training data");
  const Dataset data(table.num_dims, model.feature_map.num_classes(), table.instances, *table.labels);
  Vec lambda = stored.lambda;
  std::optional<double> delta;
  if (a.lambda) {
    const LambdaPolicy policy = LambdaPolicy::parse(*a.lambda);
    lambda = policy.resolve(model.feature_map);
    delta = policy.delta();
  } else if (!stored.lambda_policy.empty()) {
    delta = LambdaPolicy::parse(stored.lambda_policy).delta();
  }
  if (lambda.size() != model.feature_map.dim()) throw InputError("lambda length does not match the model");
  const ExpectationBox box = estimate_expectations(model.feature_map, data, lambda);
  const ConstraintAtoms atoms = constraint_atoms(model.feature_map, data);
  const EpsilonTable own = rule_loss_table(model, atoms);
  if (model.variant == Variant::ExpectationOnly) {
    const double upper = upper_bound(model, box);
    std::cout << "upper_bound " << num(upper) << "\n";
    std::cout << "lower_bound " << num(lower_bound(model, box, atoms)) << "\n";
    std::cout << "worst_case_risk " << num(worst_case_risk(own, box, atoms)) << "\n";
    for (const auto& [name, value] : slack_report(upper, lambda, model.mu, data.size())) {
      if (name != "upper") std::cout << name << " " << num(value) << "\n";
    }
  } else {
    std::cout << "lower_bound " << num(lower_bound(own, box, atoms)) << "\n";
    std::cout << "worst_case_risk " << num(worst_case_risk(own, box, atoms)) << "\n";
  }
  if (delta) std::cout << "delta " << num(*delta) << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::optional<std::size_t> threads;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  const std::string base = std::filesystem::path(a.config).parent_path().string();
  const ExperimentConfig cfg = ExperimentConfig::from_json(read_text_file(a.config), base.empty() ? "." : base);
  const Dataset data = read_dataset_csv(cfg.dataset);
  const std::size_t threads = a.threads ? *a.threads : thread_budget();
  if (threads == 0) throw InputError("--threads must be positive");
  const auto rows = run_experiment(cfg, data, threads);
  std::ostringstream out;
  write_results_csv(out, rows);
  emit(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  std::string instance;
  double grid_step = 0.02;
  std::optional<double> rule_step;
};

// {"loss", "features": [x][y][m], and either "a"/"b" or "tau" with
// "half_width", optional "marginal"}
int run_oracle(const OracleArgs& a) {
  json j;
  try {
    j = json::parse(read_text_file(a.instance));
  } catch (const json::exception& e) {
    throw InputError(a.instance + ": " + e.what());
  }
  try {
    const LossKind loss = LossKind::parse(j.value("loss", std::string("zero-one")));
    const auto& feats = j.at("features");
    const std::size_t nx = feats.size();
    if (nx == 0) throw InputError("features must list at least one instance");
    const std::size_t ny = feats[0].size();
    if (ny < 2) throw InputError("features need at least two labels per instance");
    const std::size_t m = feats[0][0].size();
    Vec flat;
    for (const auto& fx : feats) {
      if (fx.size() != ny) throw InputError("every instance needs the same number of labels");
      for (const auto& fy : fx) {
        const Vec v = fy.get<Vec>();
        if (v.size() != m) throw InputError("every feature vector needs the same length");
        flat.insert(flat.end(), v.begin(), v.end());
      }
    }
    const TinyInstance inst(nx, ny, m, flat);
    ExpectationBox box;
    if (j.contains("a")) {
      box = box_from_bounds(j.at("a").get<Vec>(), j.at("b").get<Vec>());
    } else {
      const Vec tau = j.at("tau").get<Vec>();
      const double w = j.value("half_width", 0.0);
      Vec lo = tau, hi = tau;
      for (std::size_t i = 0; i < tau.size(); ++i) {
        lo[i] -= w;
        hi[i] += w;
      }
      box = box_from_bounds(lo, hi);
    }
    if (box.dim() != m) throw InputError("box length does not match the features");
    std::optional<Vec> marginal;
    if (j.contains("marginal")) marginal = j.at("marginal").get<Vec>();

    const double h = brute_force_max_entropy(loss, inst, box, marginal, a.grid_step);
    std::cout << "max_entropy " << num(h) << "\n";
    if (h == -INFINITY) std::cerr << "warning: no lattice point satisfies the box; use a finer --grid-step\n";
    if (a.rule_step) {
      std::cout << "minimax " << num(exhaustive_minimax(loss, inst, box, marginal, *a.rule_step, a.grid_step)) << "\n";
    }
    if (!marginal && loss.kind() != LossKind::Kind::LogRelative) {
      const ConstraintAtoms atoms = inst.atoms();
      std::cout << "dual_subgradient " << num(train_mrc(loss, box, atoms).objective_value) << "\n";
      if (loss.kind() == LossKind::Kind::ZeroOne) {
        std::cout << "dual_lp " << num(train_zero_one_exact(box, atoms).objective_value) << "\n";
      }
    }
  } catch (const json::exception& e) {
    throw InputError(a.instance + ": " + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax risk classifiers with generalized maximum entropy"};
  app.require_subcommand(1);

  FeaturizeArgs fz;
  auto* featurize = app.add_subcommand("featurize", "Fit threshold features and print the feature map");
  featurize->add_option("--data", fz.data, "Training CSV with a label column")->required();
  featurize->add_option("--max-leaves", fz.max_leaves, "Leaves per dimension")->capture_default_str();
  featurize->add_option("--out", fz.out, "Output JSON (default: stdout)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a classifier and report its risk bounds");
  train->add_option("--data", tr.data, "Training CSV with a label column")->required();
  train->add_option("--loss", tr.loss, "zero-one, log or alpha:<a>")->capture_default_str();
  train->add_option("--lambda", tr.lambda, "Number, file of numbers, or theorem3:<delta>")->capture_default_str();
  train->add_option("--variant", tr.variant, "expectation or fixed-marginal")->capture_default_str();
  train->add_option("--solver", tr.solver, "auto (lp for zero-one with at most 12 classes), subgradient, or lp (zero-one only)")->capture_default_str();
  train->add_option("--max-leaves", tr.max_leaves, "Leaves per dimension")->capture_default_str();
  train->add_option("--num-classes", tr.num_classes, "Number of classes (default: largest label)");
  train->add_flag("--lower", tr.lower, "Also compute the lower bound");
  train->add_flag("--strict", tr.strict, "Exit 3 when the solver does not converge");
  train->add_option("--max-iters", tr.max_iters, "Iteration budget")->capture_default_str();
  train->add_option("--tol", tr.tol, "Convergence tolerance")->capture_default_str();
  train->add_option("--out", tr.out, "Model JSON to write");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Print a label and class probabilities per instance");
  predict->add_option("--model", pr.model, "Model JSON")->required();
  predict->add_option("--data", pr.data, "Instance CSV (a label column is ignored)")->required();
  predict->add_option("--seed", pr.seed, "Seed for sampled zero-one labels")->capture_default_str();
  predict->add_option("--out", pr.out, "Output CSV (default: stdout)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Empirical risks of a model on labeled data");
  eval->add_option("--model", ev.model, "Model JSON")->required();
  eval->add_option("--data", ev.data, "Labeled CSV")->required();
  eval->add_flag("--bounds", ev.bounds, "Print the stored bounds beside the risk");

  BoundsArgs bd;
  auto* bounds = app.add_subcommand("bounds", "Recompute risk bounds of a model on its training data");
  bounds->add_option("--model", bd.model, "Model JSON")->required();
  bounds->add_option("--data", bd.data, "Training CSV")->required();
  bounds->add_option("--lambda", bd.lambda, "Override the stored interval widths");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run a repeated train/test sweep");
  experiment->add_option("--config", ex.config, "Experiment JSON")->required();
  experiment->add_option("--out", ex.out, "Results CSV (default: stdout)");
  experiment->add_option("--threads", ex.threads, "Worker count (default: MRC_THREADS or all cores)");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Brute-force maximum entropy on a tiny explicit instance");
  oracle->add_option("--instance", orc.instance, "Instance JSON")->required();
  oracle->add_option("--grid-step", orc.grid_step, "Lattice step of the distribution grid")->capture_default_str();
  oracle->add_option("--rule-step", orc.rule_step, "Also run the minimax search with this rule step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputExit;
  }

  try {
    if (*featurize) return run_featurize(fz);
    if (*train) return run_train(tr);
    if (*predict) return run_predict(pr);
    if (*eval) return run_eval(ev);
    if (*bounds) return run_bounds(bd);
    if (*experiment) return run_experiment_cmd(ex);
    if (*oracle) return run_oracle(orc);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputExit;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericExit;
  }
  return 0;
}
