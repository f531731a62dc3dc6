// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <cmath>

#include "kc/neural.hpp"

namespace kc::neural {

void EncoderConfig::validate() const {
  if (vocab_size <= kFirstWordId) {
    throw ValidationError("encoder: vocab_size must exceed the reserved ids");
  }
  if (embed_dim < 1) {
    throw ValidationError("encoder: embed_dim must be >= 1");
  }
  if (max_seq_len < 1) {
    throw ValidationError("encoder: max_seq_len must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ValidationError("encoder: dropout_rate must lie in [0, 1)");
  }
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"embed_dim", embed_dim},
          {"max_seq_len", max_seq_len},
          {"dropout_rate", dropout_rate},
          {"pooling", pooling == Pooling::Mean ? "mean" : "cls_token"}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json &j) {
  EncoderConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  const auto pooling = j.value("pooling", std::string("mean"));
  if (pooling == "mean") {
    c.pooling = Pooling::Mean;
  } else if (pooling == "cls_token") {
    c.pooling = Pooling::ClsToken;
  } else {
    throw ValidationError("encoder: unknown pooling '" + pooling + "'");
  }
  c.validate();
  return c;
}

void CompositeLossConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("loss: gamma must be finite and >= 0");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ValidationError("loss: epsilon must lie in [0, 1)");
  }
  if (!(lambda_rd >= 0.0) || !std::isfinite(lambda_rd)) {
    throw ValidationError("loss: lambda_rd must be finite and >= 0");
  }
  if (num_classes != kNumClasses) {
    throw ValidationError("loss: K must be " + std::to_string(kNumClasses));
  }
}

nlohmann::json CompositeLossConfig::to_json() const {
  return {{"gamma", gamma}, {"epsilon", epsilon}, {"lambda_rd", lambda_rd}, {"K", num_classes}};
}

CompositeLossConfig CompositeLossConfig::from_json(const nlohmann::json &j) {
  CompositeLossConfig c;
  c.gamma = j.value("gamma", c.gamma);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.lambda_rd = j.value("lambda_rd", c.lambda_rd);
  c.num_classes = j.value("K", c.num_classes);
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ValidationError("train: lr must be finite and >= 0");
  }
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw ValidationError("train: warmup_ratio must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ValidationError("train: weight_decay must be >= 0");
  }
  if (max_epochs < 1 || patience < 1 || train_batch < 1 || eval_batch < 1) {
    throw ValidationError("train: max_epochs, patience and batch sizes must be >= 1");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"warmup_ratio", warmup_ratio},
          {"weight_decay", weight_decay},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"train_batch", train_batch},
          {"eval_batch", eval_batch},
          {"seed", seed},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_eps", adam_eps}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json &j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.warmup_ratio = j.value("warmup_ratio", c.warmup_ratio);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.train_batch = j.value("train_batch", c.train_batch);
  c.eval_batch = j.value("eval_batch", c.eval_batch);
  c.seed = j.value("seed", c.seed);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.validate();
  return c;
}

TokenSequence tokenize(std::string_view text, const EncoderConfig &config) {
  TokenSequence ids;
  ids.reserve(config.max_seq_len);
  if (config.pooling == Pooling::ClsToken) {
    ids.push_back(kClsId);
  }
  const std::uint64_t buckets = config.vocab_size - kFirstWordId;
  std::size_t i = 0;
  while (i < text.size() && ids.size() < config.max_seq_len) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) != 0) {
      ++i;
    }
    const std::size_t start = i;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) == 0) {
      ++i;
    }
    if (i > start) {
      ids.push_back(kFirstWordId +
                    static_cast<TokenId>(fnv1a64(text.substr(start, i - start)) % buckets));
    }
  }
  ids.resize(config.max_seq_len, kPadId);
  return ids;
}

} // namespace kc::neural
