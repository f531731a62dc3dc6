// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "kc/error.hpp"
#include "kc/evalstats.hpp"
#include "kc/features.hpp"
#include "kc/linear_models.hpp"
#include "kc/rng.hpp"

using namespace kc;
using namespace kc::linear;

namespace {

constexpr ClassWeights kOnes = {1.0, 1.0, 1.0, 1.0};

SparseVector dense(std::initializer_list<double> v) {
  SparseVector x;
  std::size_t i = 0;
  for (double a : v) {
    if (a != 0.0) {
      x.indices.push_back(i);
      x.values.push_back(a);
    }
    ++i;
  }
  return x;
}

struct Problem {
  std::vector<SparseVector> X;
  std::vector<KCLabel> y;
};

Problem random_problem(Rng &rng, std::size_t n, std::size_t d) {
  Problem p;
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector x;
    for (std::size_t j = 0; j < d; ++j) {
      if (rng.uniform() < 0.6) {
        x.indices.push_back(j);
        x.values.push_back(rng.normal());
      }
    }
    p.X.push_back(x);
    p.y.push_back(label_from_index(rng.below(4)));
  }
  // Make sure the last column exists so the inferred dimension is d.
  p.X[0].indices.push_back(d - 1);
  p.X[0].values.push_back(0.5);
  if (p.X[0].indices.size() > 1 && p.X[0].indices[p.X[0].indices.size() - 2] == d - 1) {
    p.X[0].indices.pop_back();
    p.X[0].values.pop_back();
  }
  return p;
}

// Nearest-centroid classifier: an independent check that the synthetic
// keyword task is separable in TF-IDF space.
std::vector<KCLabel> nearest_centroid(std::span<const SparseVector> train_x,
                                      std::span<const KCLabel> train_y,
                                      std::span<const SparseVector> test_x, std::size_t d) {
  std::vector<std::vector<double>> c(kNumClasses, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    for (std::size_t n = 0; n < train_x[i].nnz(); ++n) {
      c[index_of(train_y[i])][train_x[i].indices[n]] += train_x[i].values[n];
    }
  }
  std::vector<KCLabel> out;
  for (const auto &x : test_x) {
    ProbabilityVector s{};
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      double dot = 0, norm = 0;
      for (double v : c[k]) norm += v * v;
      for (std::size_t n = 0; n < x.nnz(); ++n) dot += c[k][x.indices[n]] * x.values[n];
      s[k] = norm > 0 ? dot / std::sqrt(norm) : 0.0;
    }
    out.push_back(argmax_label(s));
  }
  return out;
}

// Keyword corpus: class k documents contain marker words of class k among
// shared filler words.
std::pair<std::vector<std::string>, std::vector<KCLabel>> keyword_corpus(std::size_t per_class,
                                                                         std::uint64_t seed) {
  const char *markers[4][3] = {{"lol", "haha", "nice"},
                               {"fact", "formula", "defined"},
                               {"wonder", "why", "confused"},
                               {"disagree", "evidence", "consensus"}};
  const char *filler[] = {"the", "video", "about", "energy", "planet", "class", "light",
                          "with", "today", "graph", "orbit", "heat"};
  Rng rng(seed);
  std::vector<std::string> texts;
  std::vector<KCLabel> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      std::string t;
      const auto n = 5 + rng.below(6);
      const auto pos = rng.below(n);
      for (std::uint64_t w = 0; w < n; ++w) {
        if (!t.empty()) t += ' ';
        t += w == pos ? markers[k][rng.below(3)] : filler[rng.below(12)];
      }
      texts.push_back(t);
      labels.push_back(label_from_index(k));
    }
  }
  return {texts, labels};
}

double rel_err(double a, double b) {
  const double diff = std::abs(a - b);
  if (diff < 1e-9) return 0.0;
  return diff / std::max(std::abs(a), std::abs(b));
}

} // namespace

TEST_CASE("predict_proba examples") {
  LinearModel m(ModelKind::Logistic, 3, 0.0);
  const auto p = m.predict_proba(dense({1, 2, 3}));
  for (double v : p) CHECK(v == doctest::Approx(0.25));
  m.bias() = {10, 0, 0, 0};
  CHECK(m.predict_proba(dense({0, 0, 1}))[0] >= 0.999);
  CHECK(m.predict(dense({0, 0, 1})) == KCLabel::NonKC);
  SparseVector bad;
  bad.indices = {5};
  bad.values = {1.0};
  CHECK_THROWS_AS(m.predict_proba(bad), ValidationError);

  Rng rng(4);
  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    LinearModel r(kind, 5, 0.0);
    for (auto &w : r.weights()) w = 3 * rng.normal();
    for (auto &b : r.bias()) b = rng.normal();
    for (int t = 0; t < 100; ++t) {
      SparseVector x = dense({rng.normal(), rng.normal(), 0, rng.normal(), rng.normal()});
      const auto q = r.predict_proba(x);
      double s = 0;
      for (double v : q) s += v;
      CHECK(std::abs(s - 1.0) < 1e-9);
      CHECK(argmax_label(q) == r.predict(x));
    }
  }
}

TEST_CASE("separable singleton classes are fit exactly") {
  const std::vector<SparseVector> X = {dense({1, 0}), dense({0, 1})};
  const std::vector<KCLabel> y = {KCLabel::NonKC, KCLabel::Share};
  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    LinearTrainConfig c;
    c.batch_size = 0;
    const auto m = train_linear(kind, X, y, kOnes, c);
    CHECK(m.predict(X[0]) == KCLabel::NonKC);
    CHECK(m.predict(X[1]) == KCLabel::Share);
    CHECK(m.objective() <= m.initial_objective());
    for (double w : m.weights()) CHECK(std::isfinite(w));
  }
}

TEST_CASE("strong regularization collapses to the tie-break class") {
  std::vector<SparseVector> X;
  std::vector<KCLabel> y;
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> v(4, 0.0);
    v[k] = 1.0;
    X.push_back(dense({v[0], v[1], v[2], v[3]}));
    y.push_back(label_from_index(k));
  }
  LinearTrainConfig c;
  c.l2_lambda = 1e4;
  c.learning_rate = 1e-5;
  c.batch_size = 0;
  const auto m = train_logistic(X, y, kOnes, c);
  for (double w : m.weights()) CHECK(std::abs(w) < 1e-3);
  for (double p : m.predict_proba(SparseVector{})) CHECK(p == doctest::Approx(0.25).epsilon(1e-9));
  // In the limit the parameters are exactly zero and the tie goes to class 0.
  const LinearModel zero(ModelKind::Logistic, 4, 1e300);
  CHECK(zero.predict(SparseVector{}) == KCLabel::NonKC);
  CHECK(zero.predict(X[3]) == KCLabel::NonKC);
}

TEST_CASE("objective gradients match central differences") {
  Rng rng(99);
  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = random_problem(rng, 8, 10);
      ClassWeights cw;
      for (auto &w : cw) w = 0.5 + rng.uniform();
      LinearModel m(kind, 10, 0.01 + 0.1 * rng.uniform());
      for (auto &w : m.weights()) w = rng.normal();
      for (auto &b : m.bias()) b = rng.normal();
      const auto e = evaluate_objective(m, p.X, p.y, cw, true);
      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t j = 0; j < m.weights().size(); ++j) {
        const double saved = m.weights()[j];
        m.weights()[j] = saved + h;
        const double up = evaluate_objective(m, p.X, p.y, cw, false).value;
        m.weights()[j] = saved - h;
        const double down = evaluate_objective(m, p.X, p.y, cw, false).value;
        m.weights()[j] = saved;
        worst = std::max(worst, rel_err(e.grad_weights[j], (up - down) / (2 * h)));
      }
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        const double saved = m.bias()[k];
        m.bias()[k] = saved + h;
        const double up = evaluate_objective(m, p.X, p.y, cw, false).value;
        m.bias()[k] = saved - h;
        const double down = evaluate_objective(m, p.X, p.y, cw, false).value;
        m.bias()[k] = saved;
        worst = std::max(worst, rel_err(e.grad_bias[k], (up - down) / (2 * h)));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("full-batch objective is non-increasing with a small step") {
  Rng rng(8);
  const auto p = random_problem(rng, 12, 6);
  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    double prev = INFINITY;
    for (std::size_t epochs = 0; epochs <= 15; ++epochs) {
      LinearTrainConfig c;
      c.batch_size = 0;
      c.learning_rate = kind == ModelKind::Logistic ? 0.05 : 0.002;
      c.max_epochs = epochs;
      const auto m = train_linear(kind, p.X, p.y, kOnes, c);
      const double v = evaluate_objective(m, p.X, p.y, kOnes, false).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("hinge loss decreases after one small subgradient step") {
  const std::vector<SparseVector> X = {dense({1.0, 0.5})};
  const std::vector<KCLabel> y = {KCLabel::Explore};
  LinearTrainConfig c;
  c.batch_size = 0;
  c.max_epochs = 1;
  c.learning_rate = 0.01;
  const auto m = train_svm(X, y, kOnes, c);
  CHECK(m.objective() < m.initial_objective());
}

TEST_CASE("class weight m equals duplicating the class m times") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_problem(rng, 6, 5);
    const std::size_t dup_class = rng.below(4);
    const double mult = 2 + static_cast<double>(rng.below(3));
    ClassWeights cw = kOnes;
    cw[dup_class] = mult;
    Problem dup;
    for (std::size_t i = 0; i < p.X.size(); ++i) {
      const int copies = index_of(p.y[i]) == dup_class ? static_cast<int>(mult) : 1;
      for (int r = 0; r < copies; ++r) {
        dup.X.push_back(p.X[i]);
        dup.y.push_back(p.y[i]);
      }
    }
    for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
      LinearTrainConfig c;
      c.batch_size = 0;
      c.max_epochs = 30;
      c.learning_rate = 0.1;
      c.l2_lambda = 0.01;
      const auto a = train_linear(kind, p.X, p.y, cw, c);
      const auto b = train_linear(kind, dup.X, dup.y, kOnes, c);
      CHECK(std::abs(a.objective() - b.objective()) < 1e-6);
    }
  }
}

TEST_CASE("training is deterministic and respects the descent contract") {
  Rng rng(1);
  const auto p = random_problem(rng, 40, 8);
  LinearTrainConfig c;
  c.batch_size = 7;
  c.seed = 5;
  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    const auto a = train_linear(kind, p.X, p.y, kOnes, c);
    const auto b = train_linear(kind, p.X, p.y, kOnes, c);
    CHECK(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
    CHECK(a.bias() == b.bias());
    CHECK(a.objective() <= a.initial_objective());
    CHECK(a.objective() == doctest::Approx(evaluate_objective(a, p.X, p.y, kOnes, false).value));
  }
}

TEST_CASE("training input errors") {
  LinearTrainConfig c;
  CHECK_THROWS_AS(train_logistic({}, {}, kOnes, c), ValidationError);
  const std::vector<SparseVector> X = {dense({1})};
  const std::vector<KCLabel> y = {KCLabel::NonKC, KCLabel::Share};
  CHECK_THROWS_AS(train_logistic(X, y, kOnes, c), ValidationError);
  const std::vector<KCLabel> y1 = {KCLabel::NonKC};
  LinearTrainConfig huge;
  huge.learning_rate = 1e308;
  huge.l2_lambda = 0.0;
  const std::vector<SparseVector> big = {dense({1e200})};
  CHECK_THROWS_AS(train_logistic(big, y1, kOnes, huge), NumericError);
}

TEST_CASE("save and load round trip") {
  Rng rng(3);
  LinearModel m(ModelKind::Svm, 7, 0.25, 11);
  for (auto &w : m.weights()) w = rng.normal();
  m.bias() = {1, 2, 3, 4};
  const auto path = std::filesystem::temp_directory_path() / "kc_test_linear.bin";
  m.save(path);
  const auto back = LinearModel::load(path);
  CHECK(back.kind() == ModelKind::Svm);
  CHECK(back.dimension() == 7);
  CHECK(back.l2_lambda() == 0.25);
  CHECK(back.seed() == 11);
  CHECK(std::equal(m.weights().begin(), m.weights().end(), back.weights().begin()));
  CHECK(back.bias() == m.bias());
  std::filesystem::remove(path);
}

TEST_CASE("keyword corpus: separable by oracle and learned by both models") {
  const auto [texts, labels] = keyword_corpus(200, 17);
  const std::size_t n = texts.size();
  std::vector<std::string> train_t, test_t;
  std::vector<KCLabel> train_y, test_y;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 10 == 0) {
      test_t.push_back(texts[i]);
      test_y.push_back(labels[i]);
    } else {
      train_t.push_back(texts[i]);
      train_y.push_back(labels[i]);
    }
  }
  const auto tfidf = features::fit_tfidf(train_t, features::TfIdfConfig{});
  std::vector<SparseVector> Xtr, Xte;
  for (const auto &t : train_t) Xtr.push_back(tfidf.transform(t));
  for (const auto &t : test_t) Xte.push_back(tfidf.transform(t));

  const auto oracle = nearest_centroid(Xtr, train_y, Xte, tfidf.dimension());
  CHECK(stats::compute_metrics(test_y, oracle).metrics.macro_f1 >= 0.95);

  for (auto kind : {ModelKind::Logistic, ModelKind::Svm}) {
    LinearTrainConfig c;
    c.seed = 2;
    const auto m = train_linear(kind, Xtr, train_y, kOnes, c);
    std::vector<KCLabel> pred;
    for (const auto &x : Xte) pred.push_back(m.predict(x));
    CHECK(stats::compute_metrics(test_y, pred).metrics.macro_f1 >= 0.95);
  }
}
