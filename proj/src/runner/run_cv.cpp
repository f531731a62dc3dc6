// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>

#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/rng.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("KC_WORKERS"); env && *env) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw ValidationError(std::string("KC_WORKERS must be a positive integer, got '") + env +
                            "'");
    }
    cap = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(cap, jobs));
}

namespace {

std::string fold_stem(std::size_t fold) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fold_%02zu", fold);
  return buf;
}

std::string fmt_prob(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Optional validation split that leaves the held-out fold untouched: take
// about a tenth of each class of the training split, seeded. Classes with a
// single member stay in training. If nothing is carved out, the training
// split doubles as validation.
std::pair<corpus::Dataset, corpus::Dataset> inner_split(const corpus::Dataset &train,
                                                        std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) by_class[index_of(train[i].label)].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fit, val;
  for (auto &members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n_val = members.size() >= 2 ? (members.size() + 9) / 10 : 0;
    val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit.insert(fit.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(fit.begin(), fit.end());
  std::sort(val.begin(), val.end());
  if (val.empty()) return {train, train};
  return {train.subset(fit), train.subset(val)};
}

struct FoldOutcome {
  bool done = false;
  stats::FoldMetrics metrics;
  std::string predictions_csv;
  std::vector<neural::EpochLog> log;
  std::exception_ptr error;
  std::string error_message;
};

FoldOutcome run_fold(const ExperimentConfig &config, const corpus::Dataset &data,
                     const corpus::FoldPlan &plan, std::size_t fold, const fs::path &out_dir) {
  FoldOutcome out;
  const auto seed = fold_seed(config.seed, fold);
  const auto test = data.subset(plan.fold_indices(data, fold));
  auto train = data.subset(plan.complement_indices(data, fold));

  FoldTraining trained;
  if (config.model == ModelType::Neural) {
    try {
      if (config.neural_validation == NeuralValidation::Inner) {
        auto [fit, val] = inner_split(train, mix_seed(seed, 7));
        trained = train_fold(config, fit, val, seed);
      } else {
        trained = train_fold(config, train, test, seed);
      }
    } catch (const neural::TrainingAborted &e) {
      out.log = e.log();
      throw;
    }
  } else {
    trained = train_fold(config, train, corpus::Dataset{}, seed);
  }
  out.log = trained.log;

  std::vector<KCLabel> truth, pred;
  std::string csv = "id,label,predicted";
  for (auto l : kAllLabels) csv += ",p_" + std::string(label_name(l));
  csv += '\n';
  for (const auto &ex : test.examples()) {
    const auto p = trained.classifier->predict_proba(ex.normalized_text);
    const auto y_hat = argmax_label(p);
    truth.push_back(ex.label);
    pred.push_back(y_hat);
    csv += csv_field(ex.id) + ',' + std::string(label_name(ex.label)) + ',' +
           std::string(label_name(y_hat));
    for (double v : p) csv += ',' + fmt_prob(v);
    csv += '\n';
  }
  out.metrics = stats::compute_metrics(truth, pred, fold).metrics;
  out.predictions_csv = std::move(csv);
  trained.classifier->save(out_dir / "checkpoints", fold);
  out.done = true;
  return out;
}

} // namespace

RunResult run_cv(const ExperimentConfig &config, const fs::path &out_dir) {
  if (config.dataset.empty()) throw ValidationError("config has no dataset path");
  return run_cv(config, corpus::ingest(config.dataset, config.format), out_dir);
}

RunResult run_cv(const ExperimentConfig &config, const corpus::Dataset &data,
                 const fs::path &out_dir) {
  if (config.n_folds < 2) throw ValidationError("n_folds must be at least 2");
  config.encoder.validate();
  config.loss.validate();
  config.train.validate();
  if (data.empty()) throw ValidationError("dataset is empty");

  const auto plan = corpus::stratified_kfold(data, config.n_folds, config.seed);
  const auto n = plan.n_folds;

  fs::create_directories(out_dir / "folds");
  fs::create_directories(out_dir / "checkpoints");
  fs::remove(out_dir / "error.json");
  fs::remove(out_dir / "summary.json");
  write_json_file(out_dir / "config.json", config.to_json());
  write_json_file(out_dir / "foldplan.json", plan.to_json());
  json seeds = {{"experiment_seed", config.seed}, {"folds", json::array()}};
  for (std::size_t f = 0; f < n; ++f) {
    seeds["folds"].push_back({{"fold", f}, {"seed", fold_seed(config.seed, f)}});
  }
  write_json_file(out_dir / "seeds.json", seeds);

  std::vector<FoldOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < n; f = next++) {
      try {
        outcomes[f] = run_fold(config, data, plan, f, out_dir);
      } catch (const neural::TrainingAborted &e) {
        outcomes[f].log = e.log();
        outcomes[f].error = std::current_exception();
        outcomes[f].error_message = e.what();
      } catch (const std::exception &e) {
        outcomes[f].error = std::current_exception();
        outcomes[f].error_message = e.what();
      }
    }
  };
  const auto workers = worker_count(n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Merge single-threaded, in fold order.
  json failed = json::array();
  std::vector<std::size_t> completed;
  std::exception_ptr first_error;
  for (std::size_t f = 0; f < n; ++f) {
    auto &o = outcomes[f];
    if (!o.log.empty()) {
      write_text_file(out_dir / "logs" / (fold_stem(f) + ".jsonl"),
                      neural::training_log_jsonl(o.log));
    }
    if (o.done) {
      write_text_file(out_dir / "folds" / (fold_stem(f) + ".csv"), o.predictions_csv);
      completed.push_back(f);
    } else {
      failed.push_back({{"fold", f}, {"error", o.error_message}});
      if (!first_error) first_error = o.error;
    }
  }
  if (first_error) {
    write_json_file(out_dir / "error.json", {{"failed", failed}, {"completed", completed}});
    std::rethrow_exception(first_error);
  }

  RunResult result;
  result.foldplan_hash = plan.hash();
  std::string metrics_csv = "fold,accuracy,macro_f1,weighted_f1\n";
  json per_fold = json::array();
  json fold_f1 = json::array();
  for (auto &o : outcomes) {
    const auto &m = o.metrics;
    metrics_csv += std::to_string(m.fold_idx) + ',' + fmt_prob(m.accuracy) + ',' +
                   fmt_prob(m.macro_f1) + ',' + fmt_prob(m.weighted_f1) + '\n';
    per_fold.push_back(m.to_json());
    fold_f1.push_back(m.macro_f1);
    result.per_fold.push_back(m);
  }
  result.summary = stats::aggregate_cv(result.per_fold);
  write_text_file(out_dir / "metrics.csv", metrics_csv);
  write_json_file(out_dir / "summary.json", {{"name", config.name},
                                             {"model", model_type_name(config.model)},
                                             {"n_folds", n},
                                             {"n_examples", data.size()},
                                             {"seed", config.seed},
                                             {"foldplan_hash", result.foldplan_hash},
                                             {"fold_macro_f1", fold_f1},
                                             {"per_fold", per_fold},
                                             {"summary", result.summary.to_json()}});
  return result;
}

} // namespace kc::runner
