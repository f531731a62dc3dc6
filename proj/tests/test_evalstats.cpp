// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "kc/error.hpp"
#include "kc/evalstats.hpp"
#include "kc/rng.hpp"

using namespace kc;
using namespace kc::stats;

namespace {

std::vector<KCLabel> labels(std::initializer_list<int> v) {
  std::vector<KCLabel> out;
  for (int x : v) out.push_back(label_from_index(static_cast<std::size_t>(x)));
  return out;
}

std::vector<double> random_series(Rng &rng, std::size_t n, double sd = 0.02) {
  std::vector<double> v(n);
  for (auto &x : v) x = 0.8 + sd * rng.normal();
  return v;
}

// Wilcoxon two-sided p by visiting every sign assignment.
double wilcoxon_enumeration(std::span<const double> a, std::span<const double> b) {
  std::vector<double> mags;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) {
      mags.push_back(std::abs(d));
      positive.push_back(d > 0);
    }
  }
  const std::size_t n = mags.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      less += mags[j] < mags[i];
      equal += mags[j] == mags[i];
    }
    ranks[i] = less + (equal + 1) / 2.0;
  }
  const double total = n * (n + 1) / 2.0;
  double w_plus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) w_plus += ranks[i];
  }
  const double w = std::min(w_plus, total - w_plus);
  std::size_t hits = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s += ranks[i];
    }
    if (std::min(s, total - s) <= w + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(1ULL << n);
}

} // namespace

TEST_CASE("compute_metrics examples") {
  const auto all = labels({0, 1, 2, 3, 0, 1, 2, 3});
  const auto perfect = compute_metrics(all, all).metrics;
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  for (const auto &c : perfect.per_class) CHECK(c.f1 == 1.0);

  const auto two = compute_metrics(labels({0, 0, 1, 1}), labels({0, 1, 0, 1})).metrics;
  CHECK(two.accuracy == 0.5);
  CHECK(two.macro_f1 == 0.5);
  CHECK_FALSE(two.per_class[2].active);

  const auto undefined = compute_metrics(labels({0, 1}), labels({0, 0})).metrics;
  CHECK(undefined.per_class[1].precision == 0.0);
  CHECK(undefined.per_class[1].precision_undefined);

  CHECK_THROWS_AS(compute_metrics(labels({0}), labels({0, 1})), ValidationError);
  CHECK_THROWS_AS(compute_metrics(labels({}), labels({})), ValidationError);
}

TEST_CASE("compute_metrics agrees with a brute-force counter") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + rng.below(50);
    std::vector<KCLabel> t, p;
    for (std::uint64_t i = 0; i < n; ++i) {
      t.push_back(label_from_index(rng.below(4)));
      p.push_back(rng.uniform() < 0.6 ? t.back() : label_from_index(rng.below(4)));
    }
    const auto r = compute_metrics(t, p);
    double f1_sum = 0, weighted = 0, active = 0, correct = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool is_t = index_of(t[i]) == c, is_p = index_of(p[i]) == c;
        tp += is_t && is_p;
        fp += !is_t && is_p;
        fn += is_t && !is_p;
      }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      const auto &got = r.metrics.per_class[c];
      CHECK(got.precision == doctest::Approx(prec).epsilon(1e-12));
      CHECK(got.recall == doctest::Approx(rec).epsilon(1e-12));
      CHECK(got.f1 == doctest::Approx(f1).epsilon(1e-12));
      CHECK(got.support == tp + fn);
      CHECK(r.confusion.support(c) == tp + fn);
      CHECK(r.confusion.predicted(c) == tp + fp);
      if (tp + fn + fp > 0) {
        f1_sum += got.f1;
        active += 1;
      }
      weighted += got.f1 * (tp + fn) / n;
      correct += tp;
    }
    CHECK(r.confusion.total() == n);
    CHECK(r.metrics.accuracy == doctest::Approx(correct / n).epsilon(1e-12));
    CHECK(r.metrics.macro_f1 == f1_sum / active);
    CHECK(r.metrics.weighted_f1 == doctest::Approx(weighted).epsilon(1e-12));
  }
}

TEST_CASE("weighted F1 equals macro F1 on balanced truth") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<KCLabel> t, p;
    const auto per = 1 + rng.below(12);
    for (std::uint64_t i = 0; i < per; ++i) {
      for (std::size_t c = 0; c < 4; ++c) {
        t.push_back(label_from_index(c));
        p.push_back(label_from_index(rng.below(4)));
      }
    }
    const auto m = compute_metrics(t, p).metrics;
    CHECK(m.weighted_f1 == m.macro_f1);
  }
}

TEST_CASE("distribution functions agree with Boost.Math") {
  Rng rng(10);
  for (int i = 0; i < 400; ++i) {
    const double a = 0.1 + 20 * rng.uniform(), b = 0.1 + 20 * rng.uniform();
    const double x = rng.uniform();
    CHECK(incomplete_beta(a, b, x) ==
          doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10).scale(1e-10));
    const double s = 0.2 + 30 * rng.uniform(), z = 40 * rng.uniform();
    CHECK(incomplete_gamma_upper(s, z) ==
          doctest::Approx(boost::math::gamma_q(s, z)).epsilon(1e-10).scale(1e-10));

    const double df = 1 + 40 * rng.uniform();
    const double t = 8 * (rng.uniform() - 0.5);
    CHECK(student_t_cdf(t, df) ==
          doctest::Approx(boost::math::cdf(boost::math::students_t(df), t)).epsilon(1e-10));
    const double d1 = 1 + 10 * rng.uniform(), d2 = 1 + 30 * rng.uniform();
    const double f = 10 * rng.uniform();
    CHECK(f_sf(f, d1, d2) ==
          doctest::Approx(boost::math::cdf(boost::math::complement(
                              boost::math::fisher_f(d1, d2), f)))
              .epsilon(1e-10)
              .scale(1e-10));
    const double c = 30 * rng.uniform();
    CHECK(chi2_sf(c, df) ==
          doctest::Approx(
              boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), c)))
              .epsilon(1e-10)
              .scale(1e-10));
    const double zz = 12 * (rng.uniform() - 0.5);
    CHECK(normal_cdf(zz) ==
          doctest::Approx(boost::math::cdf(boost::math::normal(), zz)).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("paired t test") {
  const std::vector<double> a = {1, 2, 3, 4, 5}, zero = {0, 0, 0, 0, 0};
  const auto r = paired_t_test(a, zero);
  CHECK(r.t == doctest::Approx(4.2426).epsilon(1e-4));
  CHECK(r.df == 4);
  CHECK(r.p == doctest::Approx(
                   2 * boost::math::cdf(boost::math::complement(boost::math::students_t(4), r.t)))
                   .epsilon(1e-10));
  const auto s = paired_t_test(zero, a);
  CHECK(s.t == -r.t);
  CHECK(s.p == r.p);
  CHECK_THROWS_AS(paired_t_test(a, a), DegenerateInputError);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
}

TEST_CASE("t equals d times sqrt(n)") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto n = 2 + rng.below(20);
    const auto a = random_series(rng, n), b = random_series(rng, n);
    CHECK(paired_t_test(a, b).t ==
          doctest::Approx(cohens_d_paired(a, b) * std::sqrt(double(n))).epsilon(1e-12));
  }
}

TEST_CASE("Wilcoxon signed-rank") {
  std::vector<double> a(10), b(10);
  for (int i = 0; i < 10; ++i) {
    a[i] = 0.8 + 0.001 * i;
    b[i] = a[i] - 0.01;
  }
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK(r.exact);
  CHECK(r.p == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(std::abs(r.p - 0.001953) < 5e-7);

  const std::vector<double> d = {1, -2, 3, -4, 5}, z(5, 0.0);
  const auto five = wilcoxon_signed_rank(d, z);
  CHECK(five.w_plus == 9);
  CHECK(five.w_minus == 6);
  CHECK(five.w == 6);
  CHECK(five.p == doctest::Approx(26.0 / 32.0));

  const std::vector<double> alt = {1, -1, 1, -1, 1, -1}, z6(6, 0.0);
  const auto sym = wilcoxon_signed_rank(alt, z6);
  CHECK(sym.w_plus == sym.w_minus);
  CHECK(sym.p == 1.0);

  CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), DegenerateInputError);
}

TEST_CASE("Wilcoxon exact p equals full enumeration for n <= 12") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.below(12);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so that ties and zeros occur.
      a[i] = static_cast<double>(rng.below(7));
      b[i] = static_cast<double>(rng.below(7));
    }
    if (a == b) continue;
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK(r.exact);
    CHECK(r.p == doctest::Approx(wilcoxon_enumeration(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("Wilcoxon normal approximation above the exact threshold") {
  Rng rng(14);
  const auto a = random_series(rng, 40), b = random_series(rng, 40);
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.exact);
  // Without ties: z = (W - mu + 0.5) / sigma, two-sided.
  const double n = 40, mu = n * (n + 1) / 4, sigma = std::sqrt(n * (n + 1) * (2 * n + 1) / 24);
  const double z = std::min(0.0, r.w - mu + 0.5) / sigma;
  CHECK(r.p == doctest::Approx(std::min(1.0, 2 * boost::math::cdf(boost::math::normal(), z)))
                   .epsilon(1e-10));
}

TEST_CASE("Friedman test") {
  const std::vector<std::vector<double>> fixed = {
      {0.9, 0.8, 0.7}, {0.91, 0.85, 0.6}, {0.95, 0.7, 0.65}, {0.99, 0.5, 0.4}};
  const auto r = friedman_test(fixed);
  CHECK(r.chi2 == doctest::Approx(8.0));
  CHECK(r.df == 2);
  CHECK(r.p == doctest::Approx(std::exp(-4.0)));

  const std::vector<std::vector<double>> same = {{0.8, 0.8, 0.8}, {0.7, 0.7, 0.7}};
  const auto s = friedman_test(same);
  CHECK(s.chi2 == 0.0);
  CHECK(s.p == 1.0);
  CHECK(s.all_tied);

  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 2 + rng.below(10), k = 2 + rng.below(5);
    std::vector<std::vector<double>> t(n, std::vector<double>(k));
    for (auto &row : t) {
      for (auto &v : row) v = static_cast<double>(rng.below(5));
    }
    if (std::all_of(t.begin(), t.end(), [](const auto &row) {
          return std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; });
        })) {
      continue;
    }
    const auto base = friedman_test(t);
    auto monotone = t;
    for (auto &row : monotone) {
      for (auto &v : row) v = std::exp(v) * 3 - 1;
    }
    CHECK(friedman_test(monotone).chi2 == doctest::Approx(base.chi2).epsilon(1e-12));
    auto permuted = t;
    for (auto &row : permuted) std::reverse(row.begin(), row.end());
    CHECK(friedman_test(permuted).chi2 == doctest::Approx(base.chi2).epsilon(1e-12));
    auto reordered = t;
    std::reverse(reordered.begin(), reordered.end());
    CHECK(friedman_test(reordered).chi2 == doctest::Approx(base.chi2).epsilon(1e-12));
  }
  CHECK_THROWS_AS(friedman_test({{1.0, 2.0}}), ValidationError);
  CHECK_THROWS_AS(friedman_test({{1.0}, {2.0}}), ValidationError);
}

TEST_CASE("Holm and Bonferroni corrections") {
  const std::vector<double> one = {0.2};
  CHECK(holm_correction(one) == one);
  const std::vector<double> p = {0.01, 0.04, 0.03};
  const auto h = holm_correction(p);
  CHECK(h[0] == doctest::Approx(0.03));
  CHECK(h[1] == doctest::Approx(0.06));
  CHECK(h[2] == doctest::Approx(0.06));
  const std::vector<double> ones(4, 1.0);
  CHECK(holm_correction(ones) == ones);

  Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(1 + rng.below(10));
    for (auto &v : raw) v = 1e-4 + rng.uniform() * (1 - 1e-4);
    const auto adj = holm_correction(raw);
    const auto bon = bonferroni_correction(raw);
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return raw[x] < raw[y]; });
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK(adj[i] >= raw[i]);
      CHECK(adj[i] <= 1.0);
      CHECK(adj[i] <= bon[i] + 1e-15);
      CHECK(bon[i] <= std::min(1.0, raw.size() * raw[i]) + 1e-15);
      if (i > 0) CHECK(adj[order[i]] >= adj[order[i - 1]]);
    }
  }
}

TEST_CASE("Cohen's d") {
  const std::vector<double> a = {1, 2, 3, 4, 5}, z(5, 0.0);
  CHECK(cohens_d_paired(a, z) == doctest::Approx(3.0 / std::sqrt(2.5)));
  CHECK(cohens_d_paired(z, a) == -cohens_d_paired(a, z));
  std::vector<double> shifted = a;
  for (auto &v : shifted) v += 0.25;
  CHECK_THROWS_AS(cohens_d_paired(shifted, a), DegenerateInputError);
}

TEST_CASE("Levene test") {
  const std::vector<std::vector<double>> same = {{1, 2, 3, 4}, {1, 2, 3, 4}};
  const auto s = levene_test(same);
  CHECK(s.w == 0.0);
  CHECK(s.p == 1.0);

  const std::vector<std::vector<double>> g = {{0, 0, 10, 10}, {4, 5, 5, 6}};
  const auto r = levene_test(g);
  // Deviations {5,5,5,5} and {1,0,0,1}: between 40.5 on 1 df, within 1 on 6 df.
  CHECK(r.w == doctest::Approx(243.0));
  CHECK(r.df1 == 1);
  CHECK(r.df2 == 6);
  CHECK(r.p == doctest::Approx(boost::math::cdf(boost::math::complement(
                                   boost::math::fisher_f(1, 6), 243.0)))
                   .epsilon(1e-10));

  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> groups(2 + rng.below(3));
    for (auto &grp : groups) grp = random_series(rng, 3 + rng.below(6), 0.1 + rng.uniform());
    const auto base = levene_test(groups);
    auto scaled = groups;
    for (auto &grp : scaled) {
      for (auto &v : grp) v *= 7.5;
    }
    CHECK(levene_test(scaled).p == doctest::Approx(base.p).epsilon(1e-9));
    CHECK(levene_test(groups, LeveneCenter::Median).p >= 0.0);
  }
  CHECK_THROWS_AS(levene_test({{1, 2}, {3}}), ValidationError);
  CHECK_THROWS_AS(levene_test({{1, 2}}), ValidationError);
}

TEST_CASE("bootstrap confidence intervals") {
  const std::vector<double> c(10, 0.836);
  const auto ci = bootstrap_ci(c, 1000, 0.95, 1);
  CHECK(ci.first == 0.836);
  CHECK(ci.second == 0.836);

  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_series(rng, 10);
    const auto a = bootstrap_ci(v, 2000, 0.95, trial);
    const auto b = bootstrap_ci(v, 2000, 0.95, trial);
    CHECK(a == b);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 10;
    CHECK(a.first <= mean);
    CHECK(mean <= a.second);
  }

  double small = 0, large = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = bootstrap_ci(random_series(rng, 10), 1000, 0.95, rep);
    const auto l = bootstrap_ci(random_series(rng, 200), 1000, 0.95, rep);
    small += s.second - s.first;
    large += l.second - l.first;
  }
  CHECK(large < small);

  CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{}, 1000, 0.95, 0), ValidationError);
  CHECK_THROWS_AS(bootstrap_ci(c, 10, 0.95, 0), ValidationError);
  CHECK_THROWS_AS(bootstrap_ci(c, 1000, 1.0, 0), ValidationError);
}

TEST_CASE("Bland-Altman") {
  const std::vector<double> a = {0.8, 0.82, 0.85};
  const auto same = bland_altman(a, a);
  CHECK(same.bias == 0.0);
  CHECK(same.loa_low == 0.0);
  CHECK(same.loa_high == 0.0);

  const std::vector<double> x = {0.51, 0.49}, y = {0.5, 0.5};
  const auto r = bland_altman(x, y);
  CHECK(r.bias == doctest::Approx(0.0).scale(1e-15));
  CHECK(r.loa_high == doctest::Approx(1.96 * std::sqrt(2e-4)).epsilon(1e-9));
  CHECK(r.loa_high == doctest::Approx(0.0277).epsilon(1e-2));
  CHECK(r.points.size() == 2);
  CHECK(r.points[0].first == doctest::Approx(0.505));
  CHECK(r.points[0].second == doctest::Approx(0.01));

  Rng rng(19);
  const auto p = random_series(rng, 10), q = random_series(rng, 10);
  auto shifted = p;
  for (auto &v : shifted) v += 0.03;
  const auto base = bland_altman(p, q), moved = bland_altman(shifted, q);
  CHECK(moved.bias == doctest::Approx(base.bias + 0.03).epsilon(1e-12));
  CHECK(moved.loa_high - moved.loa_low ==
        doctest::Approx(base.loa_high - base.loa_low).epsilon(1e-9));
  CHECK_THROWS_AS(bland_altman(p, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("tests are invariant to consistent fold reordering") {
  Rng rng(20);
  auto a = random_series(rng, 10), b = random_series(rng, 10);
  const auto t = paired_t_test(a, b);
  const auto w = wilcoxon_signed_rank(a, b);
  const auto d = cohens_d_paired(a, b);
  std::vector<std::size_t> perm(10);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span(perm));
  std::vector<double> pa, pb;
  for (auto i : perm) {
    pa.push_back(a[i]);
    pb.push_back(b[i]);
  }
  CHECK(paired_t_test(pa, pb).p == doctest::Approx(t.p).epsilon(1e-12));
  CHECK(wilcoxon_signed_rank(pa, pb).p == w.p);
  CHECK(cohens_d_paired(pa, pb) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("aggregate_cv and formatting") {
  FoldMetrics f1, f2;
  f1.macro_f1 = 0.83;
  f2.macro_f1 = 0.85;
  const std::vector<FoldMetrics> two = {f1, f2};
  const auto s = aggregate_cv(two);
  CHECK(s.macro_f1.mean == doctest::Approx(0.84));
  CHECK(s.macro_f1.sd == doctest::Approx(0.0141421356).epsilon(1e-8));
  CHECK(format_mean_sd(s.macro_f1) == ".840 ± .014");

  const std::vector<FoldMetrics> single = {f1};
  const auto one = aggregate_cv(single);
  CHECK(one.single_fold);
  CHECK(one.macro_f1.sd == 0.0);

  std::vector<FoldMetrics> ten(10);
  for (auto &f : ten) f.macro_f1 = 0.836;
  CHECK(format_mean_sd(aggregate_cv(ten).macro_f1) == ".836 ± .000");
  CHECK(format_score(0.8364) == ".836");
  CHECK(format_score(1.0) == "1.000");
  CHECK(format_score(-0.5) == "-.500");
  CHECK_THROWS_AS(aggregate_cv(std::vector<FoldMetrics>{}), ValidationError);

  const auto round = CvSummary::from_json(s.to_json());
  CHECK(round.macro_f1.mean == s.macro_f1.mean);
  const auto fm = FoldMetrics::from_json(f1.to_json());
  CHECK(fm.macro_f1 == f1.macro_f1);
}

TEST_CASE("compare_pair") {
  std::vector<double> a(10), b(10);
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    b[i] = 0.8 + 0.01 * rng.normal();
    a[i] = b[i] + 0.01;
  }
  const auto r = compare_pair("A", a, "B", b, {}, 2000, 1);
  REQUIRE(r.p_wilcoxon.has_value());
  CHECK(*r.p_wilcoxon == doctest::Approx(0.001953125));
  CHECK(r.delta_mean == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(r.ci95.first <= r.ci95.second);

  const auto self = compare_pair("A", a, "A", a, {}, 2000, 1);
  CHECK(self.verdict == "identical");
  CHECK(self.delta_mean == 0.0);
  CHECK_FALSE(self.p_wilcoxon.has_value());
  CHECK(self.p_adjusted == 1.0);
  CHECK(self.to_json()["p_wilcoxon"].is_null());
}
