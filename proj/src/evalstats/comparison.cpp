// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "kc/error.hpp"
#include "kc/evalstats.hpp"

namespace kc::stats {

void ComparisonReport::set_adjusted(double p) {
  p_adjusted = p;
  if (verdict == "identical") {
    return;
  }
  verdict = p < kSignificanceLevel ? "significant" : "not significant";
}

nlohmann::json ComparisonReport::to_json() const {
  auto opt = [](const std::optional<double> &v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"model_a", model_a},
          {"model_b", model_b},
          {"delta_mean", delta_mean},
          {"t", opt(t)},
          {"p_ttest", opt(p_ttest)},
          {"w", opt(w)},
          {"p_wilcoxon", opt(p_wilcoxon)},
          {"p_primary", p_primary},
          {"p_adjusted", p_adjusted},
          {"cohens_d", opt(cohens_d)},
          {"ci95", {ci95.first, ci95.second}},
          {"verdict", verdict},
          {"notes", notes}};
}

ComparisonReport compare_pair(const std::string &name_a, std::span<const double> a,
                              const std::string &name_b, std::span<const double> b,
                              PairTests tests, std::size_t bootstrap_resamples,
                              std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw ValidationError("compare " + name_a + " vs " + name_b + ": fold counts differ");
  }
  if (a.size() < 2) {
    throw ValidationError("compare " + name_a + " vs " + name_b + ": needs at least 2 folds");
  }
  ComparisonReport r;
  r.model_a = name_a;
  r.model_b = name_b;
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  r.delta_mean = mean_sd(d).mean;
  r.ci95 = bootstrap_ci(d, bootstrap_resamples, 0.95, seed);

  const bool identical = std::ranges::all_of(d, [](double v) { return v == 0.0; });
  if (tests.ttest) {
    try {
      const auto t = paired_t_test(a, b);
      r.t = t.t;
      r.p_ttest = t.p;
    } catch (const DegenerateInputError &e) {
      r.notes.emplace_back(e.what());
    }
  }
  if (tests.wilcoxon) {
    try {
      const auto w = wilcoxon_signed_rank(a, b);
      r.w = w.w;
      r.p_wilcoxon = w.p;
    } catch (const DegenerateInputError &e) {
      r.notes.emplace_back(e.what());
    }
  }
  try {
    r.cohens_d = cohens_d_paired(a, b);
  } catch (const DegenerateInputError &e) {
    r.notes.emplace_back(e.what());
  }

  if (tests.wilcoxon) {
    r.p_primary = r.p_wilcoxon.value_or(1.0);
  } else if (tests.ttest) {
    r.p_primary = r.p_ttest.value_or(1.0);
  }
  if (identical) {
    r.verdict = "identical";
  }
  r.set_adjusted(r.p_primary);
  return r;
}

} // namespace kc::stats
