// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kc/corpus.hpp"
#include "kc/error.hpp"
#include "kc/rng.hpp"

namespace kc::neural {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;
using ClassScores = std::array<double, kNumClasses>;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kClsId = 1;
inline constexpr TokenId kFirstWordId = 2;

enum class Pooling { Mean, ClsToken };

struct EncoderConfig {
  std::size_t vocab_size = 4096;
  std::size_t embed_dim = 64;
  std::size_t max_seq_len = 256;
  double dropout_rate = 0.1;
  Pooling pooling = Pooling::Mean;

  /// Throws ValidationError.
  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json &j);
};

struct CompositeLossConfig {
  /// Focusing strength of the (1 - p_y)^gamma factor.
  double gamma = 2.0;
  /// Label smoothing: p_y' = (1 - epsilon) p_y + epsilon / K.
  double epsilon = 0.05;
  /// Weight of the symmetric-KL consistency term.
  double lambda_rd = 1.0;
  std::size_t num_classes = kNumClasses;

  void validate() const;
  nlohmann::json to_json() const;
  static CompositeLossConfig from_json(const nlohmann::json &j);
};

struct TrainConfig {
  double lr = 1e-3;
  double warmup_ratio = 0.1;
  double weight_decay = 0.05;
  std::size_t max_epochs = 10;
  std::size_t patience = 2;
  std::size_t train_batch = 8;
  std::size_t eval_batch = 16;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json &j);
};

/**
 * Whitespace split, 64-bit FNV-1a hash of each token into
 * [kFirstWordId, vocab_size), truncation and kPadId padding to exactly
 * max_seq_len ids. With CLS pooling, kClsId occupies position 0 and counts
 * toward max_seq_len.
 */
TokenSequence tokenize(std::string_view text, const EncoderConfig &config);

/// Offsets of each tensor inside the flat parameter vector.
struct ParamLayout {
  std::size_t embedding = 0; // vocab_size x H
  std::size_t position = 0;  // max_seq_len x H
  std::size_t wq = 0;        // H x H
  std::size_t wk = 0;        // H x H
  std::size_t wv = 0;        // H x H
  std::size_t head_w = 0;    // K x H
  std::size_t head_b = 0;    // K
  std::size_t total = 0;

  explicit ParamLayout(const EncoderConfig &config);
  ParamLayout() = default;
};

/**
 * Hashed-embedding encoder with one single-head self-attention layer
 * (residual, no output projection), mean or CLS pooling, and the
 * classification head p = softmax(W dropout(h) + b).
 */
class Model {
public:
  Model() = default;
  explicit Model(EncoderConfig config);

  /// Gaussian initialization; the head bias starts at zero.
  static Model initialize(const EncoderConfig &config, std::uint64_t seed);

  const EncoderConfig &config() const { return config_; }
  const ParamLayout &layout() const { return layout_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t hidden() const { return config_.embed_dim; }

  std::span<double> head_weights();
  std::span<double> head_bias();

private:
  EncoderConfig config_;
  ParamLayout layout_;
  std::vector<double> params_;
};

struct ForwardResult {
  ClassScores logits{};
  ProbabilityVector prob{};
};

/**
 * With dropout_on the head dropout mask is drawn from `rng` (embed_dim
 * uniforms); otherwise `rng` is untouched and the map is deterministic.
 */
ForwardResult forward(const Model &model, std::span<const TokenId> tokens, bool dropout_on,
                      Rng &rng);
ProbabilityVector predict_proba(const Model &model, std::string_view normalized_text);

/// -(1 - p_y)^gamma * log((1 - epsilon) p_y + epsilon / K).
double focal_ls_loss(const ProbabilityVector &prob, KCLabel y, const CompositeLossConfig &cfg);
/// d focal_ls_loss / d p_y.
double focal_ls_loss_grad(double p_y, const CompositeLossConfig &cfg);

/// (KL(p1 || p2) + KL(p2 || p1)) / 2.
double rdrop_loss(const ProbabilityVector &p1, const ProbabilityVector &p2);

struct LossResult {
  double total = 0.0;
  /// Focal term averaged over both passes and the batch.
  double focal = 0.0;
  /// Consistency term averaged over the batch.
  double rdrop = 0.0;
  /// Largest single-pass focal loss in the batch.
  double max_focal = 0.0;
  /// dL/dparams, same layout as Model::params(); empty unless requested.
  std::vector<double> grad;
};

/**
 * Composite objective L = L_FL + lambda_rd * L_RD over a batch. Each example
 * gets two forward passes with independent head-dropout masks drawn from
 * `rng` in batch order (pass 1 mask, then pass 2 mask). The encoder has no
 * stochastic layer, so its activations are shared by the two passes;
 * gradients flow through both passes into it.
 */
LossResult total_loss(const Model &model, std::span<const TokenSequence> batch,
                      std::span<const KCLabel> labels, const CompositeLossConfig &cfg, Rng &rng,
                      bool with_gradient = true);

/// Linear warmup from 0, then cosine decay to 0 at total_steps.
class WarmupCosineSchedule {
public:
  WarmupCosineSchedule(double peak_lr, std::size_t total_steps, double warmup_ratio);

  double at(std::size_t step) const;
  std::size_t warmup_steps() const { return warmup_steps_; }
  std::size_t total_steps() const { return total_steps_; }

private:
  double peak_;
  std::size_t total_steps_;
  std::size_t warmup_steps_;
};

/// Adam with decoupled weight decay. Parameters with decay_mask[i] == false are not decayed.
class AdamW {
public:
  AdamW(std::size_t n_params, double beta1, double beta2, double eps, double weight_decay,
        std::vector<bool> decay_mask = {});

  void step(std::span<double> params, std::span<const double> grad, double lr);
  std::size_t steps_taken() const { return t_; }

private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::vector<bool> decay_mask_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

/// Tracks the best metric; equal values do not count as improvement.
class EarlyStopping {
public:
  explicit EarlyStopping(std::size_t patience);

  /// Records one epoch's metric; returns true when it is a new best.
  bool update(double metric);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  double val_macro_f1 = 0.0;
  /// Largest per-pass focal loss seen during the epoch.
  double max_focal_loss = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// Raised when the loss goes non-finite; carries the parameters before the failing step.
class TrainingAborted : public NumericError {
public:
  TrainingAborted(const std::string &what, Model last_good, std::vector<EpochLog> log)
      : NumericError(what), last_good_(std::move(last_good)), log_(std::move(log)) {}

  const Model &last_good() const { return last_good_; }
  const std::vector<EpochLog> &log() const { return log_; }

private:
  Model last_good_;
  std::vector<EpochLog> log_;
};

TrainResult train_split(const corpus::Dataset &train, const corpus::Dataset &validation,
                        const EncoderConfig &encoder, const CompositeLossConfig &loss,
                        const TrainConfig &config);

/// Trains on every fold except fold_idx and early-stops on fold_idx.
TrainResult train(const corpus::Dataset &data, const corpus::FoldPlan &plan,
                  std::size_t fold_idx, const EncoderConfig &encoder,
                  const CompositeLossConfig &loss, const TrainConfig &config);

/// JSON lines {epoch, train_loss, lr, val_macro_f1}.
std::string training_log_jsonl(std::span<const EpochLog> log);

void save_checkpoint(const std::filesystem::path &path, const Model &model);
Model load_checkpoint(const std::filesystem::path &path);

} // namespace kc::neural
