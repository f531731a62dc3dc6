// SPDX-License-Identifier: Apache-2.0
// Encoder internals shared by the forward pass and the objective.
#pragma once

#include <span>
#include <vector>

#include "kc/neural.hpp"

namespace kc::neural::detail {

/// Activations of one encoder pass, kept for backpropagation.
struct EncoderCache {
  std::size_t length = 0;
  std::vector<TokenId> ids;
  std::vector<double> x; // L x H, embeddings + positions
  std::vector<double> q, k, v;
  std::vector<double> attn; // L x L, row-softmaxed
  std::vector<double> pooled; // H
};

/// Runs the encoder up to (not including) head dropout.
void encode(const Model &model, std::span<const TokenId> tokens, EncoderCache &cache);

/// Accumulates dL/dparams into `grad` given dL/dpooled.
void encode_backward(const Model &model, const EncoderCache &cache,
                     std::span<const double> d_pooled, std::span<double> grad);

/// Inverted-dropout mask of length H (entries 0 or 1 / (1 - rate)).
std::vector<double> dropout_mask(std::size_t hidden, double rate, Rng &rng);

/// logits = W (mask * pooled) + b; an empty mask means no dropout.
ClassScores head_logits(const Model &model, std::span<const double> pooled,
                        std::span<const double> mask);

void check_finite(std::span<const double> values, const char *layer);

} // namespace kc::neural::detail
