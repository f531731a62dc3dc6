// SPDX-License-Identifier: Apache-2.0
#include "kc/corpus.hpp"
#include "kc/error.hpp"

namespace kc::corpus {

double cohens_kappa(std::span<const KCLabel> labels_a, std::span<const KCLabel> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw ValidationError("cohens_kappa: length mismatch (" + std::to_string(labels_a.size()) +
                          " vs " + std::to_string(labels_b.size()) + ")");
  }
  if (labels_a.empty()) {
    throw ValidationError("cohens_kappa: empty input");
  }
  const auto n = static_cast<double>(labels_a.size());
  ClassCounts marg_a{}, marg_b{};
  std::size_t agree = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++marg_a[index_of(labels_a[i])];
    ++marg_b[index_of(labels_b[i])];
    agree += labels_a[i] == labels_b[i] ? 1 : 0;
  }
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p_e += (static_cast<double>(marg_a[k]) / n) * (static_cast<double>(marg_b[k]) / n);
  }
  // p_e == 1 forces both coders onto one shared label, hence p_o == 1.
  if (p_e >= 1.0) {
    return 1.0;
  }
  return (p_o - p_e) / (1.0 - p_e);
}

} // namespace kc::corpus
