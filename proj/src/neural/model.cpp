// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "encoder.hpp"
#include "kc/neural.hpp"

namespace kc::neural {

ParamLayout::ParamLayout(const EncoderConfig &config) {
  const std::size_t h = config.embed_dim;
  std::size_t off = 0;
  embedding = off;
  off += config.vocab_size * h;
  position = off;
  off += config.max_seq_len * h;
  wq = off;
  off += h * h;
  wk = off;
  off += h * h;
  wv = off;
  off += h * h;
  head_w = off;
  off += kNumClasses * h;
  head_b = off;
  off += kNumClasses;
  total = off;
}

Model::Model(EncoderConfig config) : config_(config) {
  config_.validate();
  layout_ = ParamLayout(config_);
  params_.assign(layout_.total, 0.0);
}

Model Model::initialize(const EncoderConfig &config, std::uint64_t seed) {
  Model m(config);
  Rng rng(seed);
  const std::size_t h = config.embed_dim;
  const auto &lay = m.layout_;
  auto fill = [&](std::size_t offset, std::size_t count, double sd) {
    for (std::size_t i = 0; i < count; ++i) {
      m.params_[offset + i] = sd * rng.normal();
    }
  };
  const double attn_sd = 1.0 / std::sqrt(static_cast<double>(h));
  fill(lay.embedding, config.vocab_size * h, 0.1);
  fill(lay.position, config.max_seq_len * h, 0.01);
  fill(lay.wq, h * h, attn_sd);
  fill(lay.wk, h * h, attn_sd);
  fill(lay.wv, h * h, attn_sd);
  fill(lay.head_w, kNumClasses * h, 0.1);
  return m;
}

std::span<double> Model::head_weights() {
  return std::span(params_).subspan(layout_.head_w, kNumClasses * hidden());
}

std::span<double> Model::head_bias() {
  return std::span(params_).subspan(layout_.head_b, kNumClasses);
}

namespace detail {

void check_finite(std::span<const double> values, const char *layer) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string("non-finite activation in ") + layer + " at index " +
                         std::to_string(i) + " (value " + std::to_string(values[i]) + ")");
    }
  }
}

void encode(const Model &model, std::span<const TokenId> tokens, EncoderCache &cache) {
  const auto &cfg = model.config();
  const auto &lay = model.layout();
  const auto p = model.params();
  const std::size_t h = cfg.embed_dim;

  if (tokens.size() > cfg.max_seq_len) {
    throw ValidationError("token sequence of length " + std::to_string(tokens.size()) +
                          " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  }
  std::size_t len = 0;
  while (len < tokens.size() && tokens[len] != kPadId) {
    if (tokens[len] >= cfg.vocab_size) {
      throw ValidationError("token id " + std::to_string(tokens[len]) + " >= vocab_size");
    }
    ++len;
  }
  cache.length = len;
  cache.ids.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(len));
  cache.pooled.assign(h, 0.0);
  if (len == 0) {
    return;
  }

  cache.x.assign(len * h, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const double *e = &p[lay.embedding + cache.ids[t] * h];
    const double *pos = &p[lay.position + t * h];
    double *xt = &cache.x[t * h];
    for (std::size_t j = 0; j < h; ++j) {
      xt[j] = e[j] + pos[j];
    }
  }

  auto project = [&](std::size_t w_off, std::vector<double> &out) {
    out.assign(len * h, 0.0);
    const double *w = &p[w_off];
    for (std::size_t t = 0; t < len; ++t) {
      const double *xt = &cache.x[t * h];
      double *ot = &out[t * h];
      for (std::size_t i = 0; i < h; ++i) {
        const double xi = xt[i];
        const double *wrow = w + i * h;
        for (std::size_t j = 0; j < h; ++j) {
          ot[j] += xi * wrow[j];
        }
      }
    }
  };
  project(lay.wq, cache.q);
  project(lay.wk, cache.k);
  project(lay.wv, cache.v);

  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  cache.attn.assign(len * len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double *row = &cache.attn[t * len];
    const double *qt = &cache.q[t * h];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < len; ++s) {
      const double *ks = &cache.k[s * h];
      double dot = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        dot += qt[j] * ks[j];
      }
      row[s] = dot * scale;
      mx = std::max(mx, row[s]);
    }
    double z = 0.0;
    for (std::size_t s = 0; s < len; ++s) {
      row[s] = std::exp(row[s] - mx);
      z += row[s];
    }
    for (std::size_t s = 0; s < len; ++s) {
      row[s] /= z;
    }
  }
  check_finite(cache.attn, "attention");

  // pooled = pool_t (x_t + sum_s attn[t][s] v_s)
  const bool mean = cfg.pooling == Pooling::Mean;
  const std::size_t rows = mean ? len : 1;
  const double w_row = mean ? 1.0 / static_cast<double>(len) : 1.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const double *xt = &cache.x[t * h];
    for (std::size_t j = 0; j < h; ++j) {
      cache.pooled[j] += w_row * xt[j];
    }
    const double *row = &cache.attn[t * len];
    for (std::size_t s = 0; s < len; ++s) {
      const double a = w_row * row[s];
      const double *vs = &cache.v[s * h];
      for (std::size_t j = 0; j < h; ++j) {
        cache.pooled[j] += a * vs[j];
      }
    }
  }
  check_finite(cache.pooled, "pooling");
}

void encode_backward(const Model &model, const EncoderCache &cache,
                     std::span<const double> d_pooled, std::span<double> grad) {
  const std::size_t len = cache.length;
  if (len == 0) {
    return;
  }
  const auto &cfg = model.config();
  const auto &lay = model.layout();
  const auto p = model.params();
  const std::size_t h = cfg.embed_dim;
  const bool mean = cfg.pooling == Pooling::Mean;
  const std::size_t rows = mean ? len : 1;
  const double w_row = mean ? 1.0 / static_cast<double>(len) : 1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));

  // dH[t] = w_row * d_pooled for pooled rows, zero elsewhere.
  std::vector<double> dh(h);
  for (std::size_t j = 0; j < h; ++j) {
    dh[j] = w_row * d_pooled[j];
  }

  std::vector<double> dx(len * h, 0.0);
  std::vector<double> dq(len * h, 0.0);
  std::vector<double> dk(len * h, 0.0);
  std::vector<double> dv(len * h, 0.0);
  std::vector<double> da(len);
  for (std::size_t t = 0; t < rows; ++t) {
    double *dxt = &dx[t * h];
    for (std::size_t j = 0; j < h; ++j) {
      dxt[j] += dh[j];
    }
    const double *arow = &cache.attn[t * len];
    double weighted = 0.0;
    for (std::size_t s = 0; s < len; ++s) {
      const double *vs = &cache.v[s * h];
      double dot = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        dot += dh[j] * vs[j];
      }
      da[s] = dot;
      weighted += arow[s] * dot;
      double *dvs = &dv[s * h];
      for (std::size_t j = 0; j < h; ++j) {
        dvs[j] += arow[s] * dh[j];
      }
    }
    const double *qt = &cache.q[t * h];
    double *dqt = &dq[t * h];
    for (std::size_t s = 0; s < len; ++s) {
      const double ds = arow[s] * (da[s] - weighted) * scale;
      if (ds == 0.0) {
        continue;
      }
      const double *ks = &cache.k[s * h];
      double *dks = &dk[s * h];
      for (std::size_t j = 0; j < h; ++j) {
        dqt[j] += ds * ks[j];
        dks[j] += ds * qt[j];
      }
    }
  }

  // dW += X^T dY and dX += dY W^T for each projection.
  auto back_project = [&](std::size_t w_off, const std::vector<double> &dy) {
    const double *w = &p[w_off];
    double *gw = &grad[w_off];
    for (std::size_t t = 0; t < len; ++t) {
      const double *xt = &cache.x[t * h];
      const double *dyt = &dy[t * h];
      double *dxt = &dx[t * h];
      for (std::size_t i = 0; i < h; ++i) {
        const double *wrow = w + i * h;
        double *gwrow = gw + i * h;
        const double xi = xt[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
          gwrow[j] += xi * dyt[j];
          acc += dyt[j] * wrow[j];
        }
        dxt[i] += acc;
      }
    }
  };
  back_project(lay.wq, dq);
  back_project(lay.wk, dk);
  back_project(lay.wv, dv);

  for (std::size_t t = 0; t < len; ++t) {
    double *ge = &grad[lay.embedding + cache.ids[t] * h];
    double *gp = &grad[lay.position + t * h];
    const double *dxt = &dx[t * h];
    for (std::size_t j = 0; j < h; ++j) {
      ge[j] += dxt[j];
      gp[j] += dxt[j];
    }
  }
}

std::vector<double> dropout_mask(std::size_t hidden, double rate, Rng &rng) {
  std::vector<double> mask(hidden);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double &m : mask) {
    m = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

ClassScores head_logits(const Model &model, std::span<const double> pooled,
                        std::span<const double> mask) {
  const auto &lay = model.layout();
  const auto p = model.params();
  const std::size_t h = model.hidden();
  ClassScores s{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double *w = &p[lay.head_w + k * h];
    double acc = p[lay.head_b + k];
    for (std::size_t j = 0; j < h; ++j) {
      acc += w[j] * (mask.empty() ? pooled[j] : mask[j] * pooled[j]);
    }
    s[k] = acc;
  }
  check_finite(s, "classifier head");
  return s;
}

} // namespace detail

namespace {

ProbabilityVector softmax(const ClassScores &s) {
  const double mx = *std::ranges::max_element(s);
  ProbabilityVector p{};
  double z = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(s[k] - mx);
    z += p[k];
  }
  for (double &v : p) {
    v /= z;
  }
  return p;
}

} // namespace

ForwardResult forward(const Model &model, std::span<const TokenId> tokens, bool dropout_on,
                      Rng &rng) {
  detail::EncoderCache cache;
  detail::encode(model, tokens, cache);
  std::vector<double> mask;
  if (dropout_on) {
    mask = detail::dropout_mask(model.hidden(), model.config().dropout_rate, rng);
  }
  ForwardResult r;
  r.logits = detail::head_logits(model, cache.pooled, mask);
  r.prob = softmax(r.logits);
  return r;
}

ProbabilityVector predict_proba(const Model &model, std::string_view normalized_text) {
  Rng unused(0);
  return forward(model, tokenize(normalized_text, model.config()), false, unused).prob;
}

} // namespace kc::neural
