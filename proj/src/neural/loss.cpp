// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "kc/neural.hpp"

namespace kc::neural {

namespace {

double smoothed(double p_y, const CompositeLossConfig &cfg) {
  return (1.0 - cfg.epsilon) * p_y + cfg.epsilon / static_cast<double>(cfg.num_classes);
}

} // namespace

double focal_ls_loss(const ProbabilityVector &prob, KCLabel y, const CompositeLossConfig &cfg) {
  const double p_y = prob[index_of(y)];
  const double q = smoothed(p_y, cfg);
  if (!(q > 0.0)) {
    throw NumericError("focal loss: smoothed target probability " + std::to_string(q) +
                       " is not positive");
  }
  // The focusing factor uses the raw probability; only the log term is smoothed.
  return -std::pow(1.0 - p_y, cfg.gamma) * std::log(q);
}

double focal_ls_loss_grad(double p_y, const CompositeLossConfig &cfg) {
  const double q = smoothed(p_y, cfg);
  if (!(q > 0.0)) {
    throw NumericError("focal loss: smoothed target probability is not positive");
  }
  const double rest = 1.0 - p_y;
  const double focus_term =
      cfg.gamma == 0.0 ? 0.0 : cfg.gamma * std::pow(rest, cfg.gamma - 1.0) * std::log(q);
  return focus_term - std::pow(rest, cfg.gamma) * (1.0 - cfg.epsilon) / q;
}

double rdrop_loss(const ProbabilityVector &p1, const ProbabilityVector &p2) {
  double s = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (!(p1[k] > 0.0) || !(p2[k] > 0.0)) {
      throw NumericError("rdrop loss: probability component " + std::to_string(k) +
                         " is not strictly positive");
    }
    // KL(p1||p2) + KL(p2||p1) = sum (p1 - p2)(log p1 - log p2)
    s += (p1[k] - p2[k]) * (std::log(p1[k]) - std::log(p2[k]));
  }
  return 0.5 * s;
}

} // namespace kc::neural
