// SPDX-License-Identifier: Apache-2.0
#include "kc/error.hpp"
#include "kc/rng.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

using nlohmann::json;

std::string_view model_type_name(ModelType type) {
  switch (type) {
  case ModelType::TfidfLr: return "tfidf-lr";
  case ModelType::TfidfSvm: return "tfidf-svm";
  case ModelType::Neural: return "neural";
  }
  return "?";
}

std::optional<ModelType> parse_model_type(std::string_view name) {
  for (auto t : {ModelType::TfidfLr, ModelType::TfidfSvm, ModelType::Neural}) {
    if (model_type_name(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

json features_json(const features::TfIdfConfig &c) {
  return {{"ngram_min", c.ngram_range.min}, {"ngram_max", c.ngram_range.max}, {"min_df", c.min_df}};
}

features::TfIdfConfig features_from(const json &j) {
  features::TfIdfConfig c;
  c.ngram_range.min = j.value("ngram_min", c.ngram_range.min);
  c.ngram_range.max = j.value("ngram_max", c.ngram_range.max);
  c.min_df = j.value("min_df", c.min_df);
  if (c.ngram_range.min == 0 || c.ngram_range.min > c.ngram_range.max) {
    throw ValidationError("features: need 1 <= ngram_min <= ngram_max");
  }
  return c;
}

json linear_json(const linear::LinearTrainConfig &c) {
  return {{"l2_lambda", c.l2_lambda},         {"max_epochs", c.max_epochs},
          {"learning_rate", c.learning_rate}, {"lr_decay", c.lr_decay},
          {"batch_size", c.batch_size}};
}

linear::LinearTrainConfig linear_from(const json &j) {
  linear::LinearTrainConfig c;
  c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  if (!(c.l2_lambda >= 0.0) || !(c.learning_rate > 0.0) || !(c.lr_decay >= 0.0)) {
    throw ValidationError("linear: l2_lambda >= 0, learning_rate > 0 and lr_decay >= 0 required");
  }
  return c;
}

} // namespace

// Per-fold seeds come from the experiment seed, so the sub-config seeds are
// not serialized.
json ExperimentConfig::to_json() const {
  json train_j = train.to_json();
  train_j.erase("seed");
  return {{"name", name},
          {"dataset", dataset.generic_string()},
          {"format", format == corpus::Format::Csv ? "csv" : "jsonl"},
          {"model", model_type_name(model)},
          {"n_folds", n_folds},
          {"seed", seed},
          {"features", features_json(features)},
          {"linear", linear_json(linear)},
          {"encoder", encoder.to_json()},
          {"loss", loss.to_json()},
          {"train", train_j},
          {"neural_validation",
           neural_validation == NeuralValidation::HeldOut ? "heldout" : "inner"}};
}

ExperimentConfig ExperimentConfig::from_json(const json &j) {
  if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.dataset = j.value("dataset", std::string{});
    if (j.contains("format")) {
      const auto f = corpus::parse_format(j.at("format").get<std::string>());
      if (!f) throw ValidationError("unknown format " + j.at("format").dump());
      c.format = *f;
    }
    if (j.contains("model")) {
      const auto m = parse_model_type(j.at("model").get<std::string>());
      if (!m) throw ValidationError("unknown model " + j.at("model").dump());
      c.model = *m;
    }
    c.n_folds = j.value("n_folds", c.n_folds);
    c.seed = j.value("seed", c.seed);
    if (j.contains("features")) c.features = features_from(j.at("features"));
    if (j.contains("linear")) c.linear = linear_from(j.at("linear"));
    if (j.contains("encoder")) c.encoder = neural::EncoderConfig::from_json(j.at("encoder"));
    if (j.contains("loss")) c.loss = neural::CompositeLossConfig::from_json(j.at("loss"));
    if (j.contains("train")) c.train = neural::TrainConfig::from_json(j.at("train"));
    const auto validation = j.value("neural_validation", std::string("heldout"));
    if (validation == "heldout") {
      c.neural_validation = NeuralValidation::HeldOut;
    } else if (validation == "inner") {
      c.neural_validation = NeuralValidation::Inner;
    } else {
      throw ValidationError("neural_validation must be heldout or inner");
    }
  } catch (const json::exception &e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  if (c.n_folds < 2) throw ValidationError("n_folds must be at least 2");
  c.encoder.validate();
  c.loss.validate();
  c.train.validate();
  return c;
}

void apply_ablation(ExperimentConfig &config, Ablation ablation) {
  switch (ablation) {
  case Ablation::NoFocal: config.loss.gamma = 0.0; break;
  case Ablation::NoLabelSmoothing: config.loss.epsilon = 0.0; break;
  case Ablation::NoRDrop: config.loss.lambda_rd = 0.0; break;
  }
}

std::uint64_t fold_seed(std::uint64_t experiment_seed, std::size_t fold) {
  return mix_seed(experiment_seed, 1000 + fold);
}

} // namespace kc::runner
