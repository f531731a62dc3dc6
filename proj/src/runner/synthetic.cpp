// SPDX-License-Identifier: Apache-2.0
#include <array>

#include "kc/rng.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

namespace {

constexpr std::array<std::array<const char *, 4>, kNumClasses> kMarkers = {{
    {"lol", "subscribe", "awesome", "haha"},
    {"fact", "defined", "formula", "equals"},
    {"wonder", "confused", "puzzling", "curious"},
    {"disagree", "evidence", "therefore", "consensus"},
}};

constexpr std::array<const char *, 40> kFiller = {
    "the",    "video",   "about",  "energy",  "cells",    "and",     "this",    "lecture",
    "part",   "water",   "light",  "planet",  "in",       "my",      "class",   "we",
    "talked", "teacher", "atoms",  "gravity", "was",      "on",      "today",   "really",
    "graph",  "second",  "minute", "example", "channel",  "episode", "science", "with",
    "orbit",  "speed",   "heat",   "of",      "molecule", "to",      "wave",    "chapter"};

} // namespace

std::vector<corpus::LabeledExample> make_synthetic_corpus(std::size_t per_class,
                                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<corpus::LabeledExample> out;
  out.reserve(per_class * kNumClasses);
  for (std::size_t i = 0; i < per_class; ++i) {
    for (auto label : kAllLabels) {
      const auto &markers = kMarkers[index_of(label)];
      std::vector<std::string> words;
      const std::size_t n_filler = 6 + rng.below(9);
      for (std::size_t w = 0; w < n_filler; ++w) words.emplace_back(kFiller[rng.below(kFiller.size())]);
      const std::size_t n_markers = 1 + rng.below(2);
      for (std::size_t m = 0; m < n_markers; ++m) {
        const auto pos = rng.below(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), markers[rng.below(4)]);
      }
      std::string text;
      for (const auto &w : words) text += (text.empty() ? "" : " ") + w;
      // Some surface noise for the normalizer to remove.
      if (rng.below(5) == 0) text += " https://example.org/v?" + std::to_string(i);
      if (rng.below(5) == 0) text = "@viewer" + std::to_string(i) + " " + text;
      if (rng.below(4) == 0 && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');

      corpus::LabeledExample ex;
      ex.id = "syn-" + std::string(label_name(label)) + "-" + std::to_string(i);
      ex.raw_text = text;
      ex.normalized_text = corpus::normalize_text(text);
      ex.label = label;
      ex.source = i % 2 ? corpus::Source::LongVideo : corpus::Source::ShortVideo;
      out.push_back(std::move(ex));
    }
  }
  rng.shuffle(std::span<corpus::LabeledExample>(out));
  return out;
}

std::string synthetic_corpus_jsonl(std::size_t per_class, std::uint64_t seed) {
  std::string out;
  for (const auto &ex : make_synthetic_corpus(per_class, seed)) {
    nlohmann::json j = {{"id", ex.id},
                        {"text", ex.raw_text},
                        {"label", label_name(ex.label)},
                        {"source", corpus::source_name(ex.source)}};
    out += j.dump() + '\n';
  }
  return out;
}

} // namespace kc::runner
