// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "kc/corpus.hpp"
#include "kc/features.hpp"

namespace kc::linear {

using features::ClassWeights;
using features::SparseVector;

enum class ModelKind { Logistic, Svm };
std::string_view kind_name(ModelKind kind);

using ClassScores = std::array<double, kNumClasses>;

/**
 * K x D linear scorer. Weights are row-major: weights[k * D + j].
 *
 * For the logistic kind predict_proba is the model's softmax; for the SVM
 * kind it is a softmax over the raw one-vs-rest margins (uncalibrated).
 */
class LinearModel {
public:
  LinearModel() = default;
  LinearModel(ModelKind kind, std::size_t dimension, double l2_lambda, std::uint64_t seed = 0);

  ModelKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  double l2_lambda() const { return l2_lambda_; }
  std::uint64_t seed() const { return seed_; }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  ClassScores &bias() { return bias_; }
  const ClassScores &bias() const { return bias_; }

  /// Objective value at the stored parameters (set by training).
  double objective() const { return objective_; }
  double initial_objective() const { return initial_objective_; }
  void set_objective(double initial, double final_value) {
    initial_objective_ = initial;
    objective_ = final_value;
  }

  ClassScores scores(const SparseVector &x) const;
  ProbabilityVector predict_proba(const SparseVector &x) const;
  KCLabel predict(const SparseVector &x) const;

  void save(const std::filesystem::path &path) const;
  static LinearModel load(const std::filesystem::path &path);

private:
  void check_input(const SparseVector &x) const;

  ModelKind kind_ = ModelKind::Logistic;
  std::size_t dimension_ = 0;
  double l2_lambda_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> weights_;
  ClassScores bias_{};
  double objective_ = 0.0;
  double initial_objective_ = 0.0;
};

/// Objective value and (optionally) its gradient with respect to W and b.
struct ObjectiveEval {
  double value = 0.0;
  std::vector<double> grad_weights;
  ClassScores grad_bias{};
};

/**
 * (sum_i w_{y_i} loss_i) / (sum_i w_{y_i}) + (lambda / 2) ||W||^2 over the
 * examples in `rows` (all rows when empty). loss_i is multinomial
 * cross-entropy for the logistic kind and the one-vs-rest hinge sum for the
 * SVM kind. The bias is not regularized.
 */
ObjectiveEval evaluate_objective(const LinearModel &model, std::span<const SparseVector> X,
                                 std::span<const KCLabel> y, const ClassWeights &class_weights,
                                 bool with_gradient, std::span<const std::size_t> rows = {});

struct LinearTrainConfig {
  double l2_lambda = 1e-4;
  std::size_t max_epochs = 50;
  double learning_rate = 0.5;
  /// Epoch e uses learning_rate / (1 + lr_decay * e).
  double lr_decay = 0.0;
  /// 0 means full batch.
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/**
 * Seeded mini-batch (sub)gradient descent from zero parameters. The full
 * objective is evaluated after every epoch and the best parameters seen,
 * including the initial ones, are returned.
 */
LinearModel train_logistic(std::span<const SparseVector> X, std::span<const KCLabel> y,
                           const ClassWeights &class_weights, const LinearTrainConfig &config);
LinearModel train_svm(std::span<const SparseVector> X, std::span<const KCLabel> y,
                      const ClassWeights &class_weights, const LinearTrainConfig &config);
LinearModel train_linear(ModelKind kind, std::span<const SparseVector> X,
                         std::span<const KCLabel> y, const ClassWeights &class_weights,
                         const LinearTrainConfig &config);

/// Softmax with max-shift.
ProbabilityVector softmax(const ClassScores &scores);

} // namespace kc::linear
