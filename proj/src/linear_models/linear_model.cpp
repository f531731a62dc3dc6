// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/linear_models.hpp"

namespace kc::linear {

std::string_view kind_name(ModelKind kind) {
  return kind == ModelKind::Logistic ? "logistic" : "svm";
}

ProbabilityVector softmax(const ClassScores &scores) {
  const double m = *std::ranges::max_element(scores);
  ProbabilityVector p{};
  double z = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(scores[k] - m);
    z += p[k];
  }
  for (double &v : p) {
    v /= z;
  }
  return p;
}

LinearModel::LinearModel(ModelKind kind, std::size_t dimension, double l2_lambda,
                         std::uint64_t seed)
    : kind_(kind), dimension_(dimension), l2_lambda_(l2_lambda), seed_(seed),
      weights_(kNumClasses * dimension, 0.0) {
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw ValidationError("l2_lambda must be finite and nonnegative");
  }
}

void LinearModel::check_input(const SparseVector &x) const {
  if (x.indices.size() != x.values.size()) {
    throw ValidationError("sparse vector: index/value length mismatch");
  }
  if (!x.indices.empty() && x.indices.back() >= dimension_) {
    throw ValidationError("sparse vector column " + std::to_string(x.indices.back()) +
                          " exceeds model dimension " + std::to_string(dimension_));
  }
}

ClassScores LinearModel::scores(const SparseVector &x) const {
  check_input(x);
  ClassScores s = bias_;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double *row = weights_.data() + k * dimension_;
    for (std::size_t n = 0; n < x.nnz(); ++n) {
      s[k] += row[x.indices[n]] * x.values[n];
    }
  }
  return s;
}

ProbabilityVector LinearModel::predict_proba(const SparseVector &x) const {
  return softmax(scores(x));
}

KCLabel LinearModel::predict(const SparseVector &x) const {
  const auto s = scores(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (s[k] > s[best]) {
      best = k;
    }
  }
  return label_from_index(best);
}

void LinearModel::save(const std::filesystem::path &path) const {
  nlohmann::json header = {{"format", "kc-linear-v1"},
                           {"kind", kind_name(kind_)},
                           {"D", dimension_},
                           {"K", kNumClasses},
                           {"lambda", l2_lambda_},
                           {"seed", seed_},
                           {"objective", objective_},
                           {"initial_objective", initial_objective_}};
  std::vector<double> flat(weights_);
  flat.insert(flat.end(), bias_.begin(), bias_.end());
  write_param_blob(path, header, flat);
}

LinearModel LinearModel::load(const std::filesystem::path &path) {
  const auto blob = read_param_blob(path);
  const auto &h = blob.header;
  try {
    if (h.at("format") != "kc-linear-v1" || h.at("K").get<std::size_t>() != kNumClasses) {
      throw ValidationError("'" + path.string() + "' is not a linear model checkpoint");
    }
    const auto kind = h.at("kind") == "svm" ? ModelKind::Svm : ModelKind::Logistic;
    LinearModel m(kind, h.at("D").get<std::size_t>(), h.at("lambda").get<double>(),
                  h.at("seed").get<std::uint64_t>());
    if (blob.params.size() != m.weights_.size() + kNumClasses) {
      throw ValidationError("'" + path.string() + "': parameter count mismatch");
    }
    std::copy_n(blob.params.begin(), m.weights_.size(), m.weights_.begin());
    std::copy_n(blob.params.begin() + static_cast<std::ptrdiff_t>(m.weights_.size()),
                kNumClasses, m.bias_.begin());
    m.set_objective(h.value("initial_objective", 0.0), h.value("objective", 0.0));
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError("'" + path.string() + "': " + e.what());
  }
}

} // namespace kc::linear
