// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

namespace fs = std::filesystem;

namespace {

std::string fold_stem(std::size_t fold) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fold_%02zu", fold);
  return buf;
}

} // namespace

ProbabilityVector TfIdfLinearClassifier::predict_proba(std::string_view normalized_text) const {
  return model_.predict_proba(tfidf_.transform(normalized_text));
}

void TfIdfLinearClassifier::save(const fs::path &checkpoint_dir, std::size_t fold) const {
  const auto stem = fold_stem(fold);
  write_json_file(checkpoint_dir / (stem + ".tfidf.json"), tfidf_.to_json());
  model_.save(checkpoint_dir / (stem + ".linear.bin"));
}

std::unique_ptr<TfIdfLinearClassifier> TfIdfLinearClassifier::load(const fs::path &checkpoint_dir,
                                                                   std::size_t fold) {
  const auto stem = fold_stem(fold);
  auto tfidf = features::TfIdfModel::from_json(
      read_json_file(checkpoint_dir / (stem + ".tfidf.json")));
  auto model = linear::LinearModel::load(checkpoint_dir / (stem + ".linear.bin"));
  if (model.dimension() != tfidf.dimension()) {
    throw ValidationError("checkpoint " + stem + ": vectorizer and model dimensions differ");
  }
  return std::make_unique<TfIdfLinearClassifier>(std::move(tfidf), std::move(model));
}

ProbabilityVector NeuralClassifier::predict_proba(std::string_view normalized_text) const {
  return neural::predict_proba(model_, normalized_text);
}

void NeuralClassifier::save(const fs::path &checkpoint_dir, std::size_t fold) const {
  neural::save_checkpoint(checkpoint_dir / (fold_stem(fold) + ".neural.bin"), model_);
}

std::unique_ptr<NeuralClassifier> NeuralClassifier::load(const fs::path &checkpoint_dir,
                                                         std::size_t fold) {
  return std::make_unique<NeuralClassifier>(
      neural::load_checkpoint(checkpoint_dir / (fold_stem(fold) + ".neural.bin")));
}

FoldTraining train_fold(const ExperimentConfig &config, const corpus::Dataset &train,
                        const corpus::Dataset &validation, std::uint64_t seed) {
  if (train.empty()) throw ValidationError("empty training split");
  FoldTraining out;
  if (config.model == ModelType::Neural) {
    auto tc = config.train;
    tc.seed = seed;
    auto result = neural::train_split(train, validation, config.encoder, config.loss, tc);
    out.classifier = std::make_unique<NeuralClassifier>(std::move(result.model));
    out.log = std::move(result.log);
    return out;
  }

  std::vector<std::string> texts;
  std::vector<KCLabel> labels;
  texts.reserve(train.size());
  labels.reserve(train.size());
  for (const auto &ex : train.examples()) {
    texts.push_back(ex.normalized_text);
    labels.push_back(ex.label);
  }
  auto tfidf = features::fit_tfidf(texts, config.features);
  std::vector<features::SparseVector> X;
  X.reserve(texts.size());
  for (const auto &t : texts) X.push_back(tfidf.transform(t));

  auto lc = config.linear;
  lc.seed = seed;
  const auto kind =
      config.model == ModelType::TfidfSvm ? linear::ModelKind::Svm : linear::ModelKind::Logistic;
  auto model = linear::train_linear(kind, X, labels,
                                    features::balanced_class_weights_present(train.class_counts()),
                                    lc);
  out.classifier = std::make_unique<TfIdfLinearClassifier>(std::move(tfidf), std::move(model));
  return out;
}

} // namespace kc::runner
