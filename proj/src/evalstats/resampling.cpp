// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "kc/error.hpp"
#include "kc/evalstats.hpp"
#include "kc/rng.hpp"

namespace kc::stats {

namespace {

// Linear interpolation between order statistics (sample quantile type 7).
double quantile_sorted(const std::vector<double> &sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

std::pair<double, double> bootstrap_ci(std::span<const double> scores, std::size_t resamples,
                                       double level, std::uint64_t seed) {
  if (scores.empty()) {
    throw ValidationError("bootstrap_ci: empty scores");
  }
  if (resamples < 100) {
    throw ValidationError("bootstrap_ci: needs at least 100 resamples");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("bootstrap_ci: level must lie in (0, 1)");
  }
  Rng rng(seed);
  const std::size_t n = scores.size();
  // Means are taken relative to the first score so constant input is exact.
  const double ref = scores[0];
  std::vector<double> means(resamples);
  for (auto &m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += scores[rng.below(n)] - ref;
    }
    m = ref + s / static_cast<double>(n);
  }
  std::ranges::sort(means);
  const double alpha = 1.0 - level;
  return {quantile_sorted(means, alpha / 2.0), quantile_sorted(means, 1.0 - alpha / 2.0)};
}

BlandAltmanResult bland_altman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("bland_altman: length mismatch");
  }
  if (a.size() < 2) {
    throw ValidationError("bland_altman: needs at least 2 pairs");
  }
  BlandAltmanResult r;
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    r.points.emplace_back(0.5 * (a[i] + b[i]), d[i]);
  }
  const auto [bias, sd] = mean_sd(d);
  r.bias = bias;
  r.loa_low = bias - 1.96 * sd;
  r.loa_high = bias + 1.96 * sd;
  return r;
}

} // namespace kc::stats
