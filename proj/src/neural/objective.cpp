// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "encoder.hpp"
#include "kc/neural.hpp"

namespace kc::neural {

namespace {

struct Pass {
  std::vector<double> mask;
  ClassScores logits{};
  ProbabilityVector prob{};
  ClassScores log_prob{};
};

void finish_pass(Pass &pass) {
  // Same arithmetic as forward() so single-pass and batch losses agree bitwise.
  const double mx = *std::ranges::max_element(pass.logits);
  double z = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    pass.prob[k] = std::exp(pass.logits[k] - mx);
    z += pass.prob[k];
  }
  const double log_z = std::log(z);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    pass.prob[k] /= z;
    pass.log_prob[k] = pass.logits[k] - mx - log_z;
  }
}

// Head backward for one pass: accumulates dW, db and dL/dpooled.
void head_backward(const Model &model, const Pass &pass, std::span<const double> pooled,
                   const ClassScores &d_logits, std::span<double> grad,
                   std::vector<double> &d_pooled) {
  const auto &lay = model.layout();
  const auto p = model.params();
  const std::size_t h = model.hidden();
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double g = d_logits[k];
    grad[lay.head_b + k] += g;
    const double *w = &p[lay.head_w + k * h];
    double *gw = &grad[lay.head_w + k * h];
    for (std::size_t j = 0; j < h; ++j) {
      const double z = pass.mask[j] * pooled[j];
      gw[j] += g * z;
      d_pooled[j] += g * w[j] * pass.mask[j];
    }
  }
}

// dL/dlogits from dL/dprob through the softmax Jacobian.
ClassScores softmax_backward(const ProbabilityVector &p, const ClassScores &g) {
  double dot = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    dot += g[k] * p[k];
  }
  ClassScores out{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    out[k] = p[k] * (g[k] - dot);
  }
  return out;
}

} // namespace

LossResult total_loss(const Model &model, std::span<const TokenSequence> batch,
                      std::span<const KCLabel> labels, const CompositeLossConfig &cfg, Rng &rng,
                      bool with_gradient) {
  if (batch.empty()) {
    throw ValidationError("total_loss: empty batch");
  }
  if (batch.size() != labels.size()) {
    throw ValidationError("total_loss: batch and label counts differ");
  }
  cfg.validate();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t h = model.hidden();
  const double rate = model.config().dropout_rate;

  LossResult out;
  if (with_gradient) {
    out.grad.assign(model.params().size(), 0.0);
  }
  double focal_sum = 0.0;
  double rd_sum = 0.0;
  detail::EncoderCache cache;
  std::vector<double> d_pooled(h);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    detail::encode(model, batch[i], cache);
    std::array<Pass, 2> passes;
    for (auto &pass : passes) {
      pass.mask = detail::dropout_mask(h, rate, rng);
      pass.logits = detail::head_logits(model, cache.pooled, pass.mask);
      finish_pass(pass);
    }
    const std::size_t y = index_of(labels[i]);
    const double fl1 = focal_ls_loss(passes[0].prob, labels[i], cfg);
    const double fl2 = focal_ls_loss(passes[1].prob, labels[i], cfg);
    out.max_focal = std::max({out.max_focal, fl1, fl2});
    focal_sum += 0.5 * (fl1 + fl2);
    double rd = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      rd += (passes[0].prob[k] - passes[1].prob[k]) *
            (passes[0].log_prob[k] - passes[1].log_prob[k]);
    }
    rd_sum += 0.5 * rd;

    if (!with_gradient) {
      continue;
    }
    std::fill(d_pooled.begin(), d_pooled.end(), 0.0);
    for (std::size_t r = 0; r < 2; ++r) {
      const Pass &self = passes[r];
      const Pass &other = passes[1 - r];
      ClassScores g{};
      g[y] += 0.5 * focal_ls_loss_grad(self.prob[y], cfg) * inv_b;
      if (cfg.lambda_rd != 0.0) {
        for (std::size_t k = 0; k < kNumClasses; ++k) {
          const double d_rd = 0.5 * ((self.log_prob[k] - other.log_prob[k]) + 1.0 -
                                     std::exp(other.log_prob[k] - self.log_prob[k]));
          g[k] += cfg.lambda_rd * d_rd * inv_b;
        }
      }
      head_backward(model, self, cache.pooled, softmax_backward(self.prob, g), out.grad,
                    d_pooled);
    }
    detail::encode_backward(model, cache, d_pooled, out.grad);
  }
  out.focal = focal_sum * inv_b;
  out.rdrop = rd_sum * inv_b;
  out.total = out.focal + cfg.lambda_rd * out.rdrop;
  if (!std::isfinite(out.total)) {
    throw NumericError("total_loss: non-finite loss (focal " + std::to_string(out.focal) +
                       ", rdrop " + std::to_string(out.rdrop) + ")");
  }
  return out;
}

} // namespace kc::neural
