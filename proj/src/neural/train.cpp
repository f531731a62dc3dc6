// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "kc/evalstats.hpp"
#include "kc/neural.hpp"

namespace kc::neural {

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch}, {"train_loss", train_loss}, {"lr", lr}, {"val_macro_f1", val_macro_f1}};
}

std::string training_log_jsonl(std::span<const EpochLog> log) {
  std::string out;
  for (const auto &e : log) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

namespace {

double validation_macro_f1(const Model &model, std::span<const TokenSequence> tokens,
                           std::span<const KCLabel> labels, std::size_t eval_batch) {
  std::vector<KCLabel> predicted;
  predicted.reserve(tokens.size());
  Rng unused(0);
  for (std::size_t start = 0; start < tokens.size(); start += eval_batch) {
    const std::size_t end = std::min(tokens.size(), start + eval_batch);
    for (std::size_t i = start; i < end; ++i) {
      predicted.push_back(argmax_label(forward(model, tokens[i], false, unused).prob));
    }
  }
  return stats::compute_metrics(labels, predicted).metrics.macro_f1;
}

} // namespace

TrainResult train_split(const corpus::Dataset &train, const corpus::Dataset &validation,
                        const EncoderConfig &encoder, const CompositeLossConfig &loss,
                        const TrainConfig &config) {
  encoder.validate();
  loss.validate();
  config.validate();
  if (train.empty() || validation.empty()) {
    throw ValidationError("neural training: empty training or validation split");
  }

  auto tokenize_all = [&](const corpus::Dataset &d, std::vector<TokenSequence> &tokens,
                          std::vector<KCLabel> &labels) {
    for (const auto &ex : d.examples()) {
      tokens.push_back(tokenize(ex.normalized_text, encoder));
      labels.push_back(ex.label);
    }
  };
  std::vector<TokenSequence> train_tokens, val_tokens;
  std::vector<KCLabel> train_labels, val_labels;
  tokenize_all(train, train_tokens, train_labels);
  tokenize_all(validation, val_tokens, val_labels);

  Model model = Model::initialize(encoder, mix_seed(config.seed, 0));
  Rng order_rng(mix_seed(config.seed, 1));
  Rng dropout_rng(mix_seed(config.seed, 2));

  std::vector<bool> decay(model.params().size(), true);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    decay[model.layout().head_b + k] = false;
  }
  AdamW optimizer(model.params().size(), config.adam_beta1, config.adam_beta2, config.adam_eps,
                  config.weight_decay, std::move(decay));

  const std::size_t n = train_tokens.size();
  const std::size_t steps_per_epoch = (n + config.train_batch - 1) / config.train_batch;
  const WarmupCosineSchedule schedule(config.lr, steps_per_epoch * config.max_epochs,
                                      config.warmup_ratio);
  const double focal_bound =
      loss.epsilon > 0.0
          ? -std::log(loss.epsilon / static_cast<double>(loss.num_classes))
          : std::numeric_limits<double>::infinity();

  TrainResult result;
  EarlyStopping stopper(config.patience);
  std::vector<double> best_params(model.params().begin(), model.params().end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TokenSequence> batch_tokens;
  std::vector<KCLabel> batch_labels;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    EpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.train_batch) {
      const std::size_t end = std::min(n, start + config.train_batch);
      batch_tokens.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_tokens.push_back(train_tokens[order[i]]);
        batch_labels.push_back(train_labels[order[i]]);
      }
      LossResult res;
      try {
        res = total_loss(model, batch_tokens, batch_labels, loss, dropout_rng);
      } catch (const NumericError &e) {
        std::ostringstream msg;
        msg << "training aborted at epoch " << epoch << ", step " << step << ": " << e.what();
        throw TrainingAborted(msg.str(), model, result.log);
      }
      if (res.max_focal > focal_bound) {
        throw NumericError("focal loss " + std::to_string(res.max_focal) +
                           " exceeds the smoothing bound " + std::to_string(focal_bound));
      }
      entry.max_focal_loss = std::max(entry.max_focal_loss, res.max_focal);
      loss_sum += res.total * static_cast<double>(end - start);
      if (!std::ranges::all_of(res.grad, [](double v) { return std::isfinite(v); })) {
        throw TrainingAborted("training aborted at epoch " + std::to_string(epoch) +
                                  ": non-finite gradient at step " + std::to_string(step),
                              model, result.log);
      }
      entry.lr = schedule.at(step);
      optimizer.step(model.params(), res.grad, entry.lr);
      ++step;
    }
    entry.train_loss = loss_sum / static_cast<double>(n);
    entry.val_macro_f1 =
        validation_macro_f1(model, val_tokens, val_labels, config.eval_batch);
    result.log.push_back(entry);
    if (stopper.update(entry.val_macro_f1)) {
      std::ranges::copy(model.params(), best_params.begin());
    }
    if (stopper.should_stop()) {
      result.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  std::ranges::copy(best_params, model.params().begin());
  result.model = std::move(model);
  result.best_epoch = stopper.best_epoch();
  return result;
}

TrainResult train(const corpus::Dataset &data, const corpus::FoldPlan &plan,
                  std::size_t fold_idx, const EncoderConfig &encoder,
                  const CompositeLossConfig &loss, const TrainConfig &config) {
  if (fold_idx >= plan.n_folds) {
    throw ValidationError("fold index " + std::to_string(fold_idx) + " out of range");
  }
  const auto val_idx = plan.fold_indices(data, fold_idx);
  const auto train_idx = plan.complement_indices(data, fold_idx);
  return train_split(data.subset(train_idx), data.subset(val_idx), encoder, loss, config);
}

} // namespace kc::neural
