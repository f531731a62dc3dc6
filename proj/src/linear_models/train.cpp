// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kc/error.hpp"
#include "kc/linear_models.hpp"
#include "kc/rng.hpp"

namespace kc::linear {

namespace {

// Per-example loss and d(loss)/d(scores).
double example_loss(ModelKind kind, const ClassScores &s, std::size_t y, ClassScores *dscore) {
  if (kind == ModelKind::Logistic) {
    const double m = *std::ranges::max_element(s);
    double z = 0.0;
    for (const double v : s) {
      z += std::exp(v - m);
    }
    const double lse = m + std::log(z);
    if (dscore != nullptr) {
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        (*dscore)[k] = std::exp(s[k] - lse) - (k == y ? 1.0 : 0.0);
      }
    }
    return lse - s[y];
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double t = k == y ? 1.0 : -1.0;
    const double margin = 1.0 - t * s[k];
    if (margin > 0.0) {
      loss += margin;
    }
    if (dscore != nullptr) {
      (*dscore)[k] = margin > 0.0 ? -t : 0.0;
    }
  }
  return loss;
}

double squared_norm(std::span<const double> w) {
  double s = 0.0;
  for (const double v : w) {
    s += v * v;
  }
  return s;
}

void validate(std::span<const SparseVector> X, std::span<const KCLabel> y) {
  if (X.empty()) {
    throw ValidationError("linear training: empty training set");
  }
  if (X.size() != y.size()) {
    throw ValidationError("linear training: " + std::to_string(X.size()) + " rows but " +
                          std::to_string(y.size()) + " labels");
  }
}

std::size_t infer_dimension(std::span<const SparseVector> X) {
  std::size_t d = 0;
  for (const auto &x : X) {
    if (x.indices.size() != x.values.size()) {
      throw ValidationError("linear training: sparse index/value length mismatch");
    }
    if (!x.indices.empty()) {
      d = std::max(d, x.indices.back() + 1);
    }
  }
  return d;
}

// Applies one descent step on the rows in `batch`.
void step(LinearModel &model, std::span<const SparseVector> X, std::span<const KCLabel> y,
          const ClassWeights &cw, std::span<const std::size_t> batch, double lr) {
  const std::size_t d = model.dimension();
  double total_w = 0.0;
  for (const std::size_t i : batch) {
    total_w += cw[index_of(y[i])];
  }
  auto weights = model.weights();
  // Score against the pre-step parameters, then apply shrinkage and data term.
  std::vector<ClassScores> dscores(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t i = batch[b];
    const auto s = model.scores(X[i]);
    example_loss(model.kind(), s, index_of(y[i]), &dscores[b]);
    const double scale = cw[index_of(y[i])] / total_w;
    for (double &v : dscores[b]) {
      v *= scale;
    }
  }
  const double shrink = 1.0 - lr * model.l2_lambda();
  if (shrink != 1.0) {
    for (double &w : weights) {
      w *= shrink;
    }
  }
  auto &bias = model.bias();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto &x = X[batch[b]];
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const double g = dscores[b][k];
      if (g == 0.0) {
        continue;
      }
      bias[k] -= lr * g;
      double *row = weights.data() + k * d;
      for (std::size_t n = 0; n < x.nnz(); ++n) {
        row[x.indices[n]] -= lr * g * x.values[n];
      }
    }
  }
}

} // namespace

ObjectiveEval evaluate_objective(const LinearModel &model, std::span<const SparseVector> X,
                                 std::span<const KCLabel> y, const ClassWeights &class_weights,
                                 bool with_gradient, std::span<const std::size_t> rows) {
  validate(X, y);
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(X.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  const std::size_t d = model.dimension();
  ObjectiveEval out;
  if (with_gradient) {
    out.grad_weights.assign(kNumClasses * d, 0.0);
  }
  double total_w = 0.0;
  double data_term = 0.0;
  for (const std::size_t i : rows) {
    const double w = class_weights[index_of(y[i])];
    total_w += w;
    ClassScores ds{};
    data_term += w * example_loss(model.kind(), model.scores(X[i]), index_of(y[i]),
                                  with_gradient ? &ds : nullptr);
    if (with_gradient) {
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        out.grad_bias[k] += w * ds[k];
        for (std::size_t n = 0; n < X[i].nnz(); ++n) {
          out.grad_weights[k * d + X[i].indices[n]] += w * ds[k] * X[i].values[n];
        }
      }
    }
  }
  if (!(total_w > 0.0)) {
    throw ValidationError("linear objective: total class weight must be positive");
  }
  const auto weights = model.weights();
  out.value = data_term / total_w + 0.5 * model.l2_lambda() * squared_norm(weights);
  if (with_gradient) {
    for (double &g : out.grad_bias) {
      g /= total_w;
    }
    for (std::size_t j = 0; j < out.grad_weights.size(); ++j) {
      out.grad_weights[j] = out.grad_weights[j] / total_w + model.l2_lambda() * weights[j];
    }
  }
  return out;
}

LinearModel train_linear(ModelKind kind, std::span<const SparseVector> X,
                         std::span<const KCLabel> y, const ClassWeights &class_weights,
                         const LinearTrainConfig &config) {
  validate(X, y);
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError("linear training: learning_rate must be positive and finite");
  }
  for (const double w : class_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("linear training: class weights must be positive and finite");
    }
  }
  LinearModel model(kind, infer_dimension(X), config.l2_lambda, config.seed);

  const double initial = evaluate_objective(model, X, y, class_weights, false).value;
  LinearModel best = model;
  double best_value = initial;

  std::vector<std::size_t> order(X.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size =
      config.batch_size == 0 ? X.size() : std::min(config.batch_size, X.size());
  Rng rng(config.seed);

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr =
        config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(epoch));
    if (batch_size < X.size()) {
      rng.shuffle(std::span(order));
    }
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t len = std::min(batch_size, order.size() - start);
      step(model, X, y, class_weights, std::span(order).subspan(start, len), lr);
    }
    const double value = evaluate_objective(model, X, y, class_weights, false).value;
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << kind_name(kind) << " training diverged at epoch " << epoch + 1
          << ": objective " << value << " (initial " << initial << ", best " << best_value
          << ", lr " << lr << ")";
      throw NumericError(msg.str());
    }
    if (value < best_value) {
      best_value = value;
      best = model;
    }
  }
  best.set_objective(initial, best_value);
  return best;
}

LinearModel train_logistic(std::span<const SparseVector> X, std::span<const KCLabel> y,
                           const ClassWeights &class_weights, const LinearTrainConfig &config) {
  return train_linear(ModelKind::Logistic, X, y, class_weights, config);
}

LinearModel train_svm(std::span<const SparseVector> X, std::span<const KCLabel> y,
                      const ClassWeights &class_weights, const LinearTrainConfig &config) {
  return train_linear(ModelKind::Svm, X, y, class_weights, config);
}

} // namespace kc::linear
