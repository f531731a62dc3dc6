// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "kc/error.hpp"
#include "kc/features.hpp"
#include "kc/utf8.hpp"

namespace kc::features {

double SparseVector::norm() const {
  double s = 0.0;
  for (const double v : values) {
    s += v * v;
  }
  return std::sqrt(s);
}

std::vector<std::string> char_ngrams(std::string_view text, NgramRange range) {
  const auto bounds = utf8::boundaries(text);
  const std::size_t n_chars = bounds.size() - 1;
  std::vector<std::string> out;
  for (std::size_t start = 0; start < n_chars; ++start) {
    for (std::size_t len = range.min; len <= range.max && start + len <= n_chars; ++len) {
      out.emplace_back(text.substr(bounds[start], bounds[start + len] - bounds[start]));
    }
  }
  return out;
}

TfIdfModel::TfIdfModel(TfIdfConfig config, std::vector<std::string> terms,
                       std::vector<double> idf)
    : config_(config), terms_(std::move(terms)), idf_(std::move(idf)) {
  if (terms_.size() != idf_.size()) {
    throw ValidationError("tfidf: vocabulary and idf sizes differ");
  }
  vocabulary_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!(std::isfinite(idf_[i]) && idf_[i] > 0.0)) {
      throw ValidationError("tfidf: idf of '" + terms_[i] + "' is not finite and positive");
    }
    if (!vocabulary_.emplace(terms_[i], i).second) {
      throw ValidationError("tfidf: duplicate term '" + terms_[i] + "'");
    }
  }
}

std::ptrdiff_t TfIdfModel::column(const std::string &ngram) const {
  const auto it = vocabulary_.find(ngram);
  return it == vocabulary_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

SparseVector TfIdfModel::transform(std::string_view text) const {
  std::map<std::size_t, double> tf;
  for (const auto &g : char_ngrams(text, config_.ngram_range)) {
    const auto it = vocabulary_.find(g);
    if (it != vocabulary_.end()) {
      tf[it->second] += 1.0;
    }
  }
  SparseVector v;
  v.indices.reserve(tf.size());
  v.values.reserve(tf.size());
  double sq = 0.0;
  for (const auto &[col, count] : tf) {
    const double w = count * idf_[col];
    v.indices.push_back(col);
    v.values.push_back(w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double &x : v.values) {
      x *= inv;
    }
  }
  return v;
}

nlohmann::json TfIdfModel::to_json() const {
  return {{"ngram_min", config_.ngram_range.min},
          {"ngram_max", config_.ngram_range.max},
          {"min_df", config_.min_df},
          {"sublinear_tf", false},
          {"terms", terms_},
          {"idf", idf_}};
}

TfIdfModel TfIdfModel::from_json(const nlohmann::json &j) {
  try {
    TfIdfConfig cfg;
    cfg.ngram_range = {j.at("ngram_min").get<std::size_t>(), j.at("ngram_max").get<std::size_t>()};
    cfg.min_df = j.at("min_df").get<std::size_t>();
    if (j.value("sublinear_tf", false)) {
      throw ValidationError("tfidf: sublinear tf is not supported");
    }
    return TfIdfModel(cfg, j.at("terms").get<std::vector<std::string>>(),
                      j.at("idf").get<std::vector<double>>());
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("tfidf model JSON: ") + e.what());
  }
}

TfIdfModel fit_tfidf(std::span<const std::string> corpus, const TfIdfConfig &config) {
  if (corpus.empty()) {
    throw ValidationError("fit_tfidf: empty corpus");
  }
  const auto &r = config.ngram_range;
  if (r.min < 1 || r.min > r.max) {
    throw ValidationError("fit_tfidf: invalid n-gram range (" + std::to_string(r.min) + ", " +
                          std::to_string(r.max) + ")");
  }
  std::unordered_map<std::string, std::size_t> df;
  for (const auto &doc : corpus) {
    auto grams = char_ngrams(doc, r);
    std::ranges::sort(grams);
    const auto [first, last] = std::ranges::unique(grams);
    grams.erase(first, last);
    for (auto &g : grams) {
      ++df[std::move(g)];
    }
  }
  std::vector<std::string> terms;
  for (const auto &[g, count] : df) {
    if (count >= config.min_df) {
      terms.push_back(g);
    }
  }
  std::ranges::sort(terms);
  const auto n_docs = static_cast<double>(corpus.size());
  std::vector<double> idf;
  idf.reserve(terms.size());
  for (const auto &t : terms) {
    idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df.at(t)))) + 1.0);
  }
  return TfIdfModel(config, std::move(terms), std::move(idf));
}

} // namespace kc::features
