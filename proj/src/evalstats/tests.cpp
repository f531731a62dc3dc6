// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "kc/error.hpp"
#include "kc/evalstats.hpp"

namespace kc::stats {

namespace {

void check_paired(std::span<const double> a, std::span<const double> b, std::size_t min_n,
                  const char *what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < min_n) {
    throw ValidationError(std::string(what) + ": needs at least " + std::to_string(min_n) +
                          " pairs");
  }
}

std::vector<double> differences(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  return d;
}

// 1-based midranks, doubled so ties stay integral. Returns tie group sizes too.
std::vector<std::int64_t> doubled_midranks(std::span<const double> values,
                                           std::vector<std::size_t> *tie_sizes = nullptr) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t i, std::size_t j) {
    return values[i] < values[j];
  });
  std::vector<std::int64_t> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    // Positions i..j (0-based) share rank ((i + 1) + (j + 1)) / 2.
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = doubled;
    }
    if (tie_sizes != nullptr && j > i) {
      tie_sizes->push_back(j - i + 1);
    }
    i = j + 1;
  }
  return ranks;
}

double tie_term(const std::vector<std::size_t> &ties) {
  double s = 0.0;
  for (const std::size_t t : ties) {
    const auto td = static_cast<double>(t);
    s += td * td * td - td;
  }
  return s;
}

double median_of(std::vector<double> v) {
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  check_paired(a, b, 2, "paired_t_test");
  const auto d = differences(a, b);
  const auto [mean, sd] = mean_sd(d);
  if (!(sd > 0.0)) {
    throw DegenerateInputError("paired_t_test: differences have zero variance");
  }
  const double n = static_cast<double>(d.size());
  TTestResult r;
  r.df = n - 1.0;
  r.t = mean / (sd / std::sqrt(n));
  r.p = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  check_paired(a, b, 1, "wilcoxon_signed_rank");
  std::vector<double> nonzero;
  for (const double v : differences(a, b)) {
    if (v != 0.0) {
      nonzero.push_back(v);
    }
  }
  if (nonzero.empty()) {
    throw DegenerateInputError("wilcoxon_signed_rank: all differences are zero");
  }
  std::vector<double> magnitude(nonzero.size());
  std::ranges::transform(nonzero, magnitude.begin(), [](double v) { return std::fabs(v); });
  std::vector<std::size_t> ties;
  const auto ranks = doubled_midranks(magnitude, &ties);

  WilcoxonResult r;
  r.n = nonzero.size();
  std::int64_t plus2 = 0;
  std::int64_t total2 = 0;
  for (std::size_t i = 0; i < r.n; ++i) {
    total2 += ranks[i];
    if (nonzero[i] > 0.0) {
      plus2 += ranks[i];
    }
  }
  r.w_plus = static_cast<double>(plus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - plus2) / 2.0;
  r.w = std::min(r.w_plus, r.w_minus);
  const std::int64_t w2 = std::min(plus2, total2 - plus2);

  if (r.n <= kWilcoxonExactMaxN) {
    r.exact = true;
    // ways[s]: sign assignments whose positive doubled-rank sum is s.
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    std::int64_t reach = 0;
    for (const std::int64_t rk : ranks) {
      for (std::int64_t s = reach; s >= 0; --s) {
        ways[static_cast<std::size_t>(s + rk)] += ways[static_cast<std::size_t>(s)];
      }
      reach += rk;
    }
    double at_or_below = 0.0;
    for (std::int64_t s = 0; s <= w2; ++s) {
      at_or_below += ways[static_cast<std::size_t>(s)];
    }
    r.p = std::min(1.0, 2.0 * at_or_below / std::ldexp(1.0, static_cast<int>(r.n)));
    return r;
  }

  r.exact = false;
  const double n = static_cast<double>(r.n);
  const double mu = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(ties) / 48.0;
  const double z = std::max(0.0, std::fabs(r.w_plus - mu) - 0.5) / std::sqrt(var);
  r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

FriedmanResult friedman_test(const std::vector<std::vector<double>> &score_table) {
  const std::size_t n = score_table.size();
  if (n < 2) {
    throw ValidationError("friedman_test: needs at least 2 rows");
  }
  const std::size_t k = score_table[0].size();
  if (k < 2) {
    throw ValidationError("friedman_test: needs at least 2 columns");
  }
  std::vector<double> rank_sum(k, 0.0);
  std::vector<std::size_t> ties;
  for (const auto &row : score_table) {
    if (row.size() != k) {
      throw ValidationError("friedman_test: ragged score table");
    }
    const auto ranks = doubled_midranks(row, &ties);
    for (std::size_t j = 0; j < k; ++j) {
      rank_sum[j] += static_cast<double>(ranks[j]) / 2.0;
    }
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  FriedmanResult r;
  r.df = kd - 1.0;
  const double correction = 1.0 - tie_term(ties) / (nd * (kd * kd * kd - kd));
  if (correction <= 0.0) {
    r.all_tied = true;
    return r;
  }
  double ss = 0.0;
  for (const double s : rank_sum) {
    const double dev = s / nd - (kd + 1.0) / 2.0;
    ss += dev * dev;
  }
  r.chi2 = 12.0 * nd / (kd * (kd + 1.0)) * ss / correction;
  r.p = chi2_sf(r.chi2, r.df);
  return r;
}

std::vector<double> holm_correction(std::span<const double> p_values) {
  for (const double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("holm_correction: p-value outside [0, 1]");
    }
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t i, std::size_t j) {
    return p_values[i] < p_values[j];
  });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double scaled =
        std::min(1.0, static_cast<double>(m - j) * p_values[order[j]]);
    running = std::max(running, scaled);
    adjusted[order[j]] = running;
  }
  return adjusted;
}

std::vector<double> bonferroni_correction(std::span<const double> p_values) {
  std::vector<double> out(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    out[i] = std::min(1.0, static_cast<double>(p_values.size()) * p_values[i]);
  }
  return out;
}

double cohens_d_paired(std::span<const double> a, std::span<const double> b) {
  check_paired(a, b, 2, "cohens_d_paired");
  const auto [mean, sd] = mean_sd(differences(a, b));
  if (!(sd > 0.0)) {
    throw DegenerateInputError("cohens_d_paired: differences have zero variance");
  }
  return mean / sd;
}

LeveneResult levene_test(const std::vector<std::vector<double>> &groups, LeveneCenter center) {
  const std::size_t k = groups.size();
  if (k < 2) {
    throw ValidationError("levene_test: needs at least 2 groups");
  }
  std::vector<std::vector<double>> dev(k);
  std::vector<double> group_mean(k, 0.0);
  std::size_t total_n = 0;
  double grand = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const auto &x = groups[g];
    if (x.size() < 2) {
      throw ValidationError("levene_test: group " + std::to_string(g) + " has fewer than 2 values");
    }
    const double c = center == LeveneCenter::Mean ? mean_sd(x).mean : median_of(x);
    for (const double v : x) {
      dev[g].push_back(std::fabs(v - c));
    }
    group_mean[g] = mean_sd(dev[g]).mean;
    total_n += x.size();
    grand += std::accumulate(dev[g].begin(), dev[g].end(), 0.0);
  }
  const double nd = static_cast<double>(total_n);
  const double kd = static_cast<double>(k);
  grand /= nd;
  double between = 0.0;
  double within = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double diff = group_mean[g] - grand;
    between += static_cast<double>(dev[g].size()) * diff * diff;
    for (const double z : dev[g]) {
      within += (z - group_mean[g]) * (z - group_mean[g]);
    }
  }
  LeveneResult r;
  r.df1 = kd - 1.0;
  r.df2 = nd - kd;
  if (within == 0.0) {
    r.w = between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.w = (r.df2 / r.df1) * between / within;
  }
  r.p = f_sf(r.w, r.df1, r.df2);
  return r;
}

} // namespace kc::stats
