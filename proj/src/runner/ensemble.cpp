// SPDX-License-Identifier: Apache-2.0
#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

EnsemblePrediction average_probabilities(std::vector<ProbabilityVector> members) {
  if (members.empty()) throw ValidationError("ensemble needs at least one model");
  EnsemblePrediction out;
  for (const auto &p : members) {
    for (std::size_t k = 0; k < kNumClasses; ++k) out.averaged[k] += p[k];
  }
  const double n = static_cast<double>(members.size());
  for (auto &v : out.averaged) v /= n;
  out.label = argmax_label(out.averaged);
  out.members = std::move(members);
  return out;
}

EnsemblePrediction ensemble_predict(std::span<const std::unique_ptr<FoldClassifier>> models,
                                    std::string_view text) {
  if (models.empty()) throw ValidationError("ensemble needs at least one model");
  const auto normalized = corpus::normalize_text(text);
  std::vector<ProbabilityVector> members;
  members.reserve(models.size());
  for (const auto &m : models) {
    if (!m) throw ValidationError("ensemble member is null");
    members.push_back(m->predict_proba(normalized));
  }
  return average_probabilities(std::move(members));
}

std::vector<std::unique_ptr<FoldClassifier>>
load_run_models(const std::filesystem::path &run_dir, std::span<const std::size_t> subset) {
  const auto config = ExperimentConfig::from_json(read_json_file(run_dir / "config.json"));
  std::vector<std::size_t> folds(subset.begin(), subset.end());
  if (folds.empty()) {
    for (std::size_t f = 0; f < config.n_folds; ++f) folds.push_back(f);
  }
  const auto ckpt = run_dir / "checkpoints";
  std::vector<std::unique_ptr<FoldClassifier>> models;
  for (auto f : folds) {
    if (f >= config.n_folds) {
      throw ValidationError("fold " + std::to_string(f) + " not in run with " +
                            std::to_string(config.n_folds) + " folds");
    }
    if (config.model == ModelType::Neural) {
      models.push_back(NeuralClassifier::load(ckpt, f));
    } else {
      models.push_back(TfIdfLinearClassifier::load(ckpt, f));
    }
  }
  return models;
}

} // namespace kc::runner
