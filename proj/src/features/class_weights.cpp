// SPDX-License-Identifier: Apache-2.0
#include "kc/error.hpp"
#include "kc/features.hpp"

namespace kc::features {

ClassWeights balanced_class_weights(const ClassCounts &counts) {
  std::size_t total = 0;
  for (const KCLabel label : kAllLabels) {
    if (counts[index_of(label)] == 0) {
      throw ValidationError("balanced_class_weights: class " + std::string(label_name(label)) +
                            " has no examples");
    }
    total += counts[index_of(label)];
  }
  ClassWeights w{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    w[k] = static_cast<double>(total) /
           (static_cast<double>(kNumClasses) * static_cast<double>(counts[k]));
  }
  return w;
}

ClassWeights balanced_class_weights(const corpus::Dataset &data) {
  return balanced_class_weights(data.class_counts());
}

ClassWeights balanced_class_weights_present(const ClassCounts &counts) {
  std::size_t total = 0;
  std::size_t present = 0;
  for (const std::size_t c : counts) {
    total += c;
    present += c > 0 ? 1 : 0;
  }
  if (present == 0) {
    throw ValidationError("balanced_class_weights: no examples");
  }
  ClassWeights w{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    w[k] = counts[k] == 0 ? 1.0
                          : static_cast<double>(total) /
                                (static_cast<double>(present) * static_cast<double>(counts[k]));
  }
  return w;
}

} // namespace kc::features
