// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>

#include "kc/corpus.hpp"
#include "kc/error.hpp"

namespace kc {

namespace {

struct LabelInfo {
  std::string_view name;
  std::string_view definition;
};

// Negotiate also covers the rarer synthesis-testing and application phases.
constexpr std::array<LabelInfo, kNumClasses> kLabelInfo = {{
    {"nonKC", "Social or emotional reaction with little engagement with the video's subject."},
    {"Share", "Contributes a question, fact, opinion or personal experience about the content."},
    {"Explore", "Voices agreement or disagreement, or probes where views diverge."},
    {"Negotiate",
     "Works toward a shared understanding by clarifying concepts and reconciling ideas with "
     "evidence, including checking or applying a proposed synthesis."},
}};

bool iequals(std::string_view a, std::string_view b) {
  return std::ranges::equal(a, b, [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

} // namespace

KCLabel label_from_index(std::size_t index) {
  if (index >= kNumClasses) {
    throw ValidationError("class index " + std::to_string(index) + " out of range");
  }
  return static_cast<KCLabel>(index);
}

std::string_view label_name(KCLabel label) { return kLabelInfo[index_of(label)].name; }

std::string_view label_definition(KCLabel label) {
  return kLabelInfo[index_of(label)].definition;
}

std::optional<KCLabel> parse_label(std::string_view name) {
  for (const KCLabel label : kAllLabels) {
    if (iequals(name, label_name(label))) {
      return label;
    }
  }
  return std::nullopt;
}

KCLabel argmax_label(const ProbabilityVector &p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (p[k] > p[best]) {
      best = k;
    }
  }
  return static_cast<KCLabel>(best);
}

namespace corpus {

std::string_view source_name(Source source) {
  switch (source) {
  case Source::ShortVideo:
    return "short_video";
  case Source::LongVideo:
    return "long_video";
  case Source::Unknown:
    break;
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view name) {
  for (const Source s : {Source::ShortVideo, Source::LongVideo, Source::Unknown}) {
    if (iequals(name, source_name(s))) {
      return s;
    }
  }
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view name) {
  if (iequals(name, "csv")) {
    return Format::Csv;
  }
  if (iequals(name, "jsonl")) {
    return Format::Jsonl;
  }
  return std::nullopt;
}

} // namespace corpus
} // namespace kc
