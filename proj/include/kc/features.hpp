// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "kc/corpus.hpp"

namespace kc::features {

struct NgramRange {
  std::size_t min = 3;
  std::size_t max = 5;
};

struct TfIdfConfig {
  NgramRange ngram_range;
  std::size_t min_df = 2;
};

/// Sparse row: strictly increasing column indices with matching values.
struct SparseVector {
  std::vector<std::size_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  double norm() const;
};

/**
 * Fitted character n-gram vocabulary with smoothed idf.
 *
 * N-grams are taken over Unicode code points of the whole normalized string,
 * spaces included. Columns are numbered in byte-lexicographic n-gram order.
 */
class TfIdfModel {
public:
  TfIdfModel() = default;
  TfIdfModel(TfIdfConfig config, std::vector<std::string> terms, std::vector<double> idf);

  const TfIdfConfig &config() const { return config_; }
  std::size_t dimension() const { return terms_.size(); }
  std::span<const std::string> terms() const { return terms_; }
  std::span<const double> idf() const { return idf_; }
  /// Column of an n-gram, or -1.
  std::ptrdiff_t column(const std::string &ngram) const;
  bool sublinear_tf() const { return false; }

  /// tf * idf over in-vocabulary n-grams, L2-normalized. Pure.
  SparseVector transform(std::string_view text) const;

  nlohmann::json to_json() const;
  static TfIdfModel from_json(const nlohmann::json &j);

private:
  TfIdfConfig config_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> vocabulary_;
};

/// All character n-grams of `text` with lengths in `range`, in order, with repeats.
std::vector<std::string> char_ngrams(std::string_view text, NgramRange range);

/// idf_t = ln((1 + N) / (1 + df_t)) + 1 over terms with df_t >= min_df.
TfIdfModel fit_tfidf(std::span<const std::string> corpus, const TfIdfConfig &config);

/// Per-class weights indexed by index_of(label).
using ClassWeights = std::array<double, kNumClasses>;

/// weight(c) = n_total / (K * n_c). Every class must be present.
ClassWeights balanced_class_weights(const corpus::Dataset &data);
ClassWeights balanced_class_weights(const ClassCounts &counts);

/**
 * Balanced weights over the classes that occur: K is the number of present
 * classes and absent classes get weight 1. Used for training splits that
 * legitimately miss a class.
 */
ClassWeights balanced_class_weights_present(const ClassCounts &counts);

} // namespace kc::features
