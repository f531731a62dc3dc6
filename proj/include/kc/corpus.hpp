// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kc {

/// Knowledge-construction level of a comment, in increasing epistemic depth.
enum class KCLabel : std::uint8_t { NonKC = 0, Share = 1, Explore = 2, Negotiate = 3 };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<KCLabel, kNumClasses> kAllLabels = {
    KCLabel::NonKC, KCLabel::Share, KCLabel::Explore, KCLabel::Negotiate};

constexpr std::size_t index_of(KCLabel label) { return static_cast<std::size_t>(label); }
KCLabel label_from_index(std::size_t index);

/// Canonical name: "nonKC", "Share", "Explore", "Negotiate".
std::string_view label_name(KCLabel label);
/// Coding-manual definition of the category.
std::string_view label_definition(KCLabel label);
/// Case-insensitive lookup by canonical name; std::nullopt when unknown.
std::optional<KCLabel> parse_label(std::string_view name);

using ClassCounts = std::array<std::size_t, kNumClasses>;
/// Length-K probability vector over KC classes, indexed by index_of(label).
using ProbabilityVector = std::array<double, kNumClasses>;

/// Argmax with ties resolved toward the lowest class index.
KCLabel argmax_label(const ProbabilityVector &p);

namespace corpus {

enum class Source { ShortVideo, LongVideo, Unknown };
std::string_view source_name(Source source);
std::optional<Source> parse_source(std::string_view name);

struct LabeledExample {
  std::string id;
  std::string raw_text;
  std::string normalized_text;
  KCLabel label = KCLabel::NonKC;
  Source source = Source::Unknown;
};

/**
 * Lowercases and strips URLs, @-mentions and emoji, then collapses
 * whitespace. The rule set:
 *   - URL: a scheme [a-z][a-z0-9+-]* starting a word and followed by "://",
 *     through the next whitespace; also "www." starting a word, through the
 *     next whitespace.
 *   - mention: '@' not preceded by a word character, followed by one or more
 *     of [a-z0-9_].
 *   - emoji: code points in Emoticons, Misc Symbols and Pictographs,
 *     Transport and Map, Supplemental Symbols and Pictographs, Dingbats,
 *     variation selectors (both blocks) and ZWJ.
 *   - ASCII whitespace runs become one space; the result is trimmed.
 * Rules are re-applied until nothing changes, so the output is a fixed point.
 * Malformed UTF-8 bytes decode to U+FFFD.
 */
std::string normalize_text(std::string_view raw);

/// Ordered, immutable collection of examples with unique ids.
class Dataset {
public:
  Dataset() = default;
  /// Throws ValidationError on duplicate ids.
  explicit Dataset(std::vector<LabeledExample> examples);

  std::span<const LabeledExample> examples() const { return examples_; }
  const LabeledExample &operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const ClassCounts &class_counts() const { return class_counts_; }
  std::optional<std::size_t> find(std::string_view id) const;

  /// Subset in the given index order.
  Dataset subset(std::span<const std::size_t> indices) const;

private:
  std::vector<LabeledExample> examples_;
  ClassCounts class_counts_{};
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class Format { Csv, Jsonl };
std::optional<Format> parse_format(std::string_view name);

/**
 * Reads `{id?, text, label, source?}` records. CSV needs a header row with
 * those column names. Missing ids become "row-<index>" (0-based record
 * index). Input order is preserved.
 */
Dataset ingest(const std::filesystem::path &path, Format format);
Dataset ingest_string(std::string_view content, Format format);

/// Writes JSONL with id, text (raw), label and source.
std::string to_jsonl(const Dataset &data);

/// Deterministic assignment of example ids to folds.
struct FoldPlan {
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> assignment;

  std::size_t fold_of(std::string_view id) const;
  /// Dataset indices in fold `fold` (validation) and in all other folds.
  std::vector<std::size_t> fold_indices(const Dataset &data, std::size_t fold) const;
  std::vector<std::size_t> complement_indices(const Dataset &data, std::size_t fold) const;
  /// Per-fold, per-class tallies over `data`.
  std::vector<ClassCounts> fold_class_counts(const Dataset &data) const;

  nlohmann::json to_json() const;
  static FoldPlan from_json(const nlohmann::json &j);
  /// Hex FNV-1a of the canonical JSON serialization.
  std::string hash() const;
};

/**
 * Per-class seeded shuffle followed by a round-robin deal. The deal offset
 * carries over between classes so fold totals also stay within one of each
 * other. Classes absent from the data are skipped; a present class with
 * fewer than n_folds members is an error.
 */
FoldPlan stratified_kfold(const Dataset &data, std::size_t n_folds, std::uint64_t seed);

/// Chance-corrected agreement between two codings of the same items.
double cohens_kappa(std::span<const KCLabel> labels_a, std::span<const KCLabel> labels_b);

} // namespace corpus
} // namespace kc
