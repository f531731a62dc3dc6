// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "kc/error.hpp"
#include "kc/features.hpp"
#include "kc/rng.hpp"
#include "kc/utf8.hpp"

using namespace kc;
using namespace kc::features;

namespace {

TfIdfConfig cfg(std::size_t lo, std::size_t hi, std::size_t min_df) {
  TfIdfConfig c;
  c.ngram_range = {lo, hi};
  c.min_df = min_df;
  return c;
}

std::string random_text(Rng &rng) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", " ", "\xC3\xA9", "d"};
  std::string s;
  const auto n = rng.below(15);
  for (std::uint64_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

} // namespace

TEST_CASE("fit_tfidf examples") {
  const std::vector<std::string> one = {"abc"};
  const auto m = fit_tfidf(one, cfg(3, 3, 1));
  REQUIRE(m.dimension() == 1);
  CHECK(m.terms()[0] == "abc");
  CHECK(m.idf()[0] == doctest::Approx(1.0));

  const std::vector<std::string> two = {"abcd", "abcd"};
  const auto m2 = fit_tfidf(two, cfg(3, 3, 1));
  REQUIRE(m2.dimension() == 2);
  CHECK(m2.terms()[0] == "abc");
  CHECK(m2.terms()[1] == "bcd");
  CHECK(m2.idf()[0] == doctest::Approx(1.0));
  CHECK(m2.idf()[1] == doctest::Approx(1.0));

  const std::vector<std::string> short_text = {"ab"};
  CHECK(fit_tfidf(short_text, cfg(3, 5, 1)).dimension() == 0);
  CHECK(char_ngrams("ab", {3, 5}).empty());

  CHECK_THROWS_AS(fit_tfidf(std::vector<std::string>{}, cfg(3, 5, 1)), ValidationError);
  CHECK_THROWS_AS(fit_tfidf(one, cfg(4, 3, 1)), ValidationError);
  CHECK_THROWS_AS(fit_tfidf(one, cfg(0, 3, 1)), ValidationError);
}

TEST_CASE("idf formula and min_df") {
  const std::vector<std::string> corpus = {"abc", "abc", "xyz"};
  const auto m = fit_tfidf(corpus, cfg(3, 3, 1));
  CHECK(m.idf()[m.column("abc")] == doctest::Approx(std::log(4.0 / 3.0) + 1.0));
  CHECK(m.idf()[m.column("xyz")] == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
  const auto m2 = fit_tfidf(corpus, cfg(3, 3, 2));
  CHECK(m2.dimension() == 1);
  CHECK(m2.column("xyz") == -1);
}

TEST_CASE("n-grams are over code points and include spaces") {
  const auto grams = char_ngrams("\xC3\xA9t\xC3\xA9 a", {3, 3});
  REQUIRE(grams.size() == 3);
  CHECK(grams[0] == "\xC3\xA9t\xC3\xA9");
  CHECK(grams[1] == "t\xC3\xA9 ");
  CHECK(grams[2] == "\xC3\xA9 a");
}

TEST_CASE("transform examples") {
  const std::vector<std::string> one = {"abc"};
  const auto m = fit_tfidf(one, cfg(3, 3, 1));
  const auto v = m.transform("abc");
  REQUIRE(v.nnz() == 1);
  CHECK(v.values[0] == doctest::Approx(1.0));
  CHECK(m.transform("zzz").empty());

  const std::vector<std::string> two = {"abcd", "abcd"};
  const auto m2 = fit_tfidf(two, cfg(3, 3, 1));
  const auto w = m2.transform("abcbcd");
  REQUIRE(w.nnz() == 2);
  CHECK(w.values[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(w.values[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("vocabulary coverage, norm and idempotence on random corpora") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::string> corpus;
    const auto n = 1 + rng.below(12);
    for (std::uint64_t i = 0; i < n; ++i) corpus.push_back(random_text(rng));
    const std::size_t min_df = 1 + rng.below(3);
    const auto m = fit_tfidf(corpus, cfg(3, 5, min_df));

    // Oracle document frequencies.
    std::map<std::string, std::size_t> df;
    for (const auto &doc : corpus) {
      const auto cps = utf8::decode(doc);
      std::set<std::string> seen;
      for (std::size_t len = 3; len <= 5; ++len) {
        for (std::size_t i = 0; i + len <= cps.size(); ++i) {
          seen.insert(utf8::encode(std::u32string(cps.begin() + i, cps.begin() + i + len)));
        }
      }
      for (const auto &g : seen) ++df[g];
    }
    std::vector<std::string> expected;
    for (const auto &[g, c] : df) {
      if (c >= min_df) expected.push_back(g);
    }
    REQUIRE(m.dimension() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(m.terms()[i] == expected[i]);
      CHECK(m.column(expected[i]) == static_cast<std::ptrdiff_t>(i));
      const double idf = std::log((1.0 + n) / (1.0 + df[expected[i]])) + 1.0;
      CHECK(m.idf()[i] == doctest::Approx(idf).epsilon(1e-12));
      CHECK(m.idf()[i] > 0.0);
    }
    for (const auto &doc : corpus) {
      const auto v = m.transform(doc);
      CHECK(v.indices == m.transform(doc).indices);
      CHECK(v.values == m.transform(doc).values);
      for (std::size_t i = 1; i < v.nnz(); ++i) CHECK(v.indices[i - 1] < v.indices[i]);
      if (!v.empty()) CHECK(std::abs(v.norm() - 1.0) < 1e-9);
    }
    const auto back = TfIdfModel::from_json(m.to_json());
    CHECK(back.dimension() == m.dimension());
    if (!corpus.empty()) CHECK(back.transform(corpus[0]).values == m.transform(corpus[0]).values);
  }
}

TEST_CASE("balanced class weights") {
  const auto w = balanced_class_weights(ClassCounts{5000, 5000, 5000, 5000});
  for (double x : w) CHECK(x == 1.0);
  const auto w2 = balanced_class_weights(ClassCounts{100, 100, 100, 700});
  CHECK(w2[0] == doctest::Approx(2.5));
  CHECK(w2[1] == doctest::Approx(2.5));
  CHECK(w2[3] == doctest::Approx(1000.0 / 2800.0));
  for (double x : balanced_class_weights(ClassCounts{1, 1, 1, 1})) CHECK(x == 1.0);
  CHECK_THROWS_AS(balanced_class_weights(ClassCounts{1, 0, 1, 1}), ValidationError);

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    ClassCounts c{};
    std::size_t total = 0;
    for (auto &x : c) total += (x = 1 + rng.below(1000));
    const auto cw = balanced_class_weights(c);
    double s = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) s += cw[k] * c[k];
    CHECK(std::abs(s - static_cast<double>(total)) < 1e-9 * total);
  }

  const auto present = balanced_class_weights_present(ClassCounts{2, 0, 6, 0});
  CHECK(present[0] == doctest::Approx(2.0));
  CHECK(present[1] == 1.0);
  CHECK(present[2] == doctest::Approx(8.0 / 12.0));
}
