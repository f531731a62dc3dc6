// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kc/corpus.hpp"
#include "kc/evalstats.hpp"
#include "kc/features.hpp"
#include "kc/linear_models.hpp"
#include "kc/neural.hpp"

namespace kc::runner {

enum class ModelType { TfidfLr, TfidfSvm, Neural };
std::string_view model_type_name(ModelType type);
std::optional<ModelType> parse_model_type(std::string_view name);

/// Where neural early stopping gets its validation data.
enum class NeuralValidation { HeldOut, Inner };

/// Everything that determines a run. Worker count is not part of it.
struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path dataset;
  corpus::Format format = corpus::Format::Jsonl;
  ModelType model = ModelType::TfidfLr;
  std::size_t n_folds = 10;
  std::uint64_t seed = 42;
  features::TfIdfConfig features;
  linear::LinearTrainConfig linear;
  neural::EncoderConfig encoder;
  neural::CompositeLossConfig loss;
  neural::TrainConfig train;
  /// HeldOut validates on the evaluation fold itself; Inner carves a
  /// stratified tenth out of the training folds instead.
  NeuralValidation neural_validation = NeuralValidation::HeldOut;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json &j);
};

enum class Ablation { NoFocal, NoLabelSmoothing, NoRDrop };
/// Zeroes exactly one loss field: gamma, epsilon or lambda_rd.
void apply_ablation(ExperimentConfig &config, Ablation ablation);

/// Seed used for fold `fold` (training order, dropout, initialization).
std::uint64_t fold_seed(std::uint64_t experiment_seed, std::size_t fold);

/// One trained fold model behind a uniform probability interface.
class FoldClassifier {
public:
  virtual ~FoldClassifier() = default;
  /// Input is already normalized.
  virtual ProbabilityVector predict_proba(std::string_view normalized_text) const = 0;
  virtual void save(const std::filesystem::path &checkpoint_dir, std::size_t fold) const = 0;
};

class TfIdfLinearClassifier final : public FoldClassifier {
public:
  TfIdfLinearClassifier(features::TfIdfModel tfidf, linear::LinearModel model)
      : tfidf_(std::move(tfidf)), model_(std::move(model)) {}

  ProbabilityVector predict_proba(std::string_view normalized_text) const override;
  void save(const std::filesystem::path &checkpoint_dir, std::size_t fold) const override;
  static std::unique_ptr<TfIdfLinearClassifier> load(const std::filesystem::path &checkpoint_dir,
                                                     std::size_t fold);

  const linear::LinearModel &model() const { return model_; }

private:
  features::TfIdfModel tfidf_;
  linear::LinearModel model_;
};

class NeuralClassifier final : public FoldClassifier {
public:
  explicit NeuralClassifier(neural::Model model) : model_(std::move(model)) {}

  ProbabilityVector predict_proba(std::string_view normalized_text) const override;
  void save(const std::filesystem::path &checkpoint_dir, std::size_t fold) const override;
  static std::unique_ptr<NeuralClassifier> load(const std::filesystem::path &checkpoint_dir,
                                                std::size_t fold);

private:
  neural::Model model_;
};

/// Output of a trained fold plus its training log (neural only).
struct FoldTraining {
  std::unique_ptr<FoldClassifier> classifier;
  std::vector<neural::EpochLog> log;
};

FoldTraining train_fold(const ExperimentConfig &config, const corpus::Dataset &train,
                        const corpus::Dataset &validation, std::uint64_t seed);

struct EnsemblePrediction {
  std::vector<ProbabilityVector> members;
  ProbabilityVector averaged{};
  KCLabel label = KCLabel::NonKC;
};

/// Arithmetic mean of the member vectors; argmax with lowest-index ties.
EnsemblePrediction average_probabilities(std::vector<ProbabilityVector> members);

/// Normalizes `text` and averages the fold models' probabilities.
EnsemblePrediction ensemble_predict(std::span<const std::unique_ptr<FoldClassifier>> models,
                                    std::string_view text);

/// Loads fold models of a finished run; an empty subset means all folds.
std::vector<std::unique_ptr<FoldClassifier>>
load_run_models(const std::filesystem::path &run_dir, std::span<const std::size_t> subset = {});

struct RunResult {
  std::vector<stats::FoldMetrics> per_fold;
  stats::CvSummary summary;
  std::string foldplan_hash;
};

/// Worker cap from KC_WORKERS (defaults to the hardware concurrency).
std::size_t worker_count(std::size_t jobs);

/**
 * Trains and evaluates every fold and writes
 *   out/{config.json, foldplan.json, seeds.json, metrics.csv, summary.json,
 *        folds/fold_XX.csv, checkpoints/, logs/}.
 * Output files are a deterministic function of the config and the data.
 * A failing fold leaves the artifacts of the others plus error.json, then
 * rethrows.
 */
RunResult run_cv(const ExperimentConfig &config, const std::filesystem::path &out_dir);
RunResult run_cv(const ExperimentConfig &config, const corpus::Dataset &data,
                 const std::filesystem::path &out_dir);

/// Loaded summary.json of a run directory.
struct RunSummary {
  std::string name;
  std::filesystem::path dir;
  std::string model;
  std::string foldplan_hash;
  std::vector<stats::FoldMetrics> per_fold;
  stats::CvSummary summary;

  std::vector<double> fold_macro_f1() const;
};

/// Throws ValidationError listing missing files.
RunSummary load_run(const std::filesystem::path &run_dir);

enum class Correction { Holm, None };

struct CompareOptions {
  stats::PairTests tests;
  Correction correction = Correction::Holm;
  std::size_t bootstrap_resamples = 10000;
  std::uint64_t seed = 0;
  /// Index pairs into the run list; Bland-Altman is computed for these.
  std::vector<std::pair<std::size_t, std::size_t>> bland_altman_pairs;
};

struct ModelInterval {
  std::string name;
  double mean = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
};

struct BlandAltmanEntry {
  std::string model_a;
  std::string model_b;
  stats::BlandAltmanResult result;
};

struct ComparisonTable {
  std::optional<stats::FriedmanResult> friedman;
  std::vector<stats::ComparisonReport> pairs;
  std::vector<ModelInterval> intervals;
  std::vector<BlandAltmanEntry> bland_altman;

  nlohmann::json to_json() const;
  /// Model A, Model B, delta, p_Wilcoxon, Cohen's d, p_adjusted, then p_ttest
  /// and the verdict.
  std::string to_csv() const;
};

/// Pairwise comparison of fold-level macro-F1 across runs sharing one fold plan.
ComparisonTable compare_models(std::span<const RunSummary> runs, const CompareOptions &options);
ComparisonTable compare_models(std::span<const std::filesystem::path> run_dirs,
                               const CompareOptions &options);
void write_comparison(const ComparisonTable &table, const std::filesystem::path &out_dir);

/**
 * Writes table2.csv (mean ± SD per metric, best per column marked), one
 * per-class table per KC category, cv_macro_f1.csv and Bland-Altman pair
 * CSVs for each adjacent pair of runs. Returns the human-readable table.
 */
std::string report(std::span<const std::filesystem::path> run_dirs,
                   const std::filesystem::path &out_dir);

/**
 * Four-class corpus where each document carries one or two class-specific
 * marker words among shared filler words.
 */
std::vector<corpus::LabeledExample> make_synthetic_corpus(std::size_t per_class,
                                                          std::uint64_t seed);
std::string synthetic_corpus_jsonl(std::size_t per_class, std::uint64_t seed);

} // namespace kc::runner
