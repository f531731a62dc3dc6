// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <numeric>

#include "kc/error.hpp"
#include "kc/evalstats.hpp"

namespace kc::stats {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto &row : counts) {
    t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  }
  return t;
}

std::size_t ConfusionMatrix::support(std::size_t true_class) const {
  const auto &row = counts.at(true_class);
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::predicted(std::size_t predicted_class) const {
  std::size_t t = 0;
  for (const auto &row : counts) {
    t += row.at(predicted_class);
  }
  return t;
}

EvaluationResult compute_metrics(std::span<const KCLabel> truth,
                                 std::span<const KCLabel> predicted, std::size_t fold_idx) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("compute_metrics: " + std::to_string(truth.size()) + " labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) {
    throw ValidationError("compute_metrics: empty input");
  }
  EvaluationResult out;
  auto &cm = out.confusion;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
  }
  const auto total = static_cast<double>(truth.size());
  auto &m = out.metrics;
  m.fold_idx = fold_idx;
  std::size_t correct = 0;
  std::size_t n_active = 0;
  double f1_sum = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const std::size_t tp = cm.counts[k][k];
    const std::size_t support = cm.support(k);
    const std::size_t pred = cm.predicted(k);
    correct += tp;
    auto &c = m.per_class[k];
    c.support = support;
    c.active = support > 0 || pred > 0;
    c.precision_undefined = pred == 0;
    c.recall_undefined = support == 0;
    c.precision = pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred);
    c.recall = support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(support);
    c.f1 = (c.precision + c.recall) == 0.0
               ? 0.0
               : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    if (c.active) {
      ++n_active;
      f1_sum += c.f1;
    }
    weighted += (static_cast<double>(support) / total) * c.f1;
  }
  m.accuracy = static_cast<double>(correct) / total;
  m.macro_f1 = f1_sum / static_cast<double>(n_active);
  m.weighted_f1 = weighted;
  return out;
}

nlohmann::json FoldMetrics::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const KCLabel label : kAllLabels) {
    const auto &c = per_class[index_of(label)];
    classes[std::string(label_name(label))] = {
        {"precision", c.precision},
        {"recall", c.recall},
        {"f1", c.f1},
        {"support", c.support},
        {"active", c.active},
        {"precision_undefined", c.precision_undefined},
        {"recall_undefined", c.recall_undefined}};
  }
  return {{"fold", fold_idx},
          {"accuracy", accuracy},
          {"macro_f1", macro_f1},
          {"weighted_f1", weighted_f1},
          {"per_class", classes}};
}

FoldMetrics FoldMetrics::from_json(const nlohmann::json &j) {
  FoldMetrics m;
  m.fold_idx = j.at("fold").get<std::size_t>();
  m.accuracy = j.at("accuracy").get<double>();
  m.macro_f1 = j.at("macro_f1").get<double>();
  m.weighted_f1 = j.at("weighted_f1").get<double>();
  for (const KCLabel label : kAllLabels) {
    const auto &c = j.at("per_class").at(std::string(label_name(label)));
    auto &dst = m.per_class[index_of(label)];
    dst.precision = c.at("precision").get<double>();
    dst.recall = c.at("recall").get<double>();
    dst.f1 = c.at("f1").get<double>();
    dst.support = c.at("support").get<std::size_t>();
    dst.active = c.at("active").get<bool>();
    dst.precision_undefined = c.value("precision_undefined", false);
    dst.recall_undefined = c.value("recall_undefined", false);
  }
  return m;
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) {
    throw ValidationError("mean_sd: empty input");
  }
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / (n - 1.0))};
}

CvSummary aggregate_cv(std::span<const FoldMetrics> per_fold) {
  if (per_fold.empty()) {
    throw ValidationError("aggregate_cv: no folds");
  }
  CvSummary s;
  s.n_folds = per_fold.size();
  s.single_fold = per_fold.size() == 1;
  auto collect = [&](auto field) {
    std::vector<double> v;
    v.reserve(per_fold.size());
    for (const auto &m : per_fold) {
      v.push_back(field(m));
    }
    return mean_sd(v);
  };
  s.accuracy = collect([](const FoldMetrics &m) { return m.accuracy; });
  s.macro_f1 = collect([](const FoldMetrics &m) { return m.macro_f1; });
  s.weighted_f1 = collect([](const FoldMetrics &m) { return m.weighted_f1; });
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    s.precision[k] = collect([k](const FoldMetrics &m) { return m.per_class[k].precision; });
    s.recall[k] = collect([k](const FoldMetrics &m) { return m.per_class[k].recall; });
    s.f1[k] = collect([k](const FoldMetrics &m) { return m.per_class[k].f1; });
  }
  return s;
}

namespace {

nlohmann::json ms_json(const MeanSd &v) { return {{"mean", v.mean}, {"sd", v.sd}}; }
MeanSd ms_from(const nlohmann::json &j) {
  return {j.at("mean").get<double>(), j.at("sd").get<double>()};
}

} // namespace

nlohmann::json CvSummary::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const KCLabel label : kAllLabels) {
    const auto k = index_of(label);
    classes[std::string(label_name(label))] = {{"precision", ms_json(precision[k])},
                                               {"recall", ms_json(recall[k])},
                                               {"f1", ms_json(f1[k])}};
  }
  return {{"n_folds", n_folds},
          {"single_fold", single_fold},
          {"accuracy", ms_json(accuracy)},
          {"macro_f1", ms_json(macro_f1)},
          {"weighted_f1", ms_json(weighted_f1)},
          {"per_class", classes}};
}

CvSummary CvSummary::from_json(const nlohmann::json &j) {
  CvSummary s;
  s.n_folds = j.at("n_folds").get<std::size_t>();
  s.single_fold = j.at("single_fold").get<bool>();
  s.accuracy = ms_from(j.at("accuracy"));
  s.macro_f1 = ms_from(j.at("macro_f1"));
  s.weighted_f1 = ms_from(j.at("weighted_f1"));
  for (const KCLabel label : kAllLabels) {
    const auto &c = j.at("per_class").at(std::string(label_name(label)));
    const auto k = index_of(label);
    s.precision[k] = ms_from(c.at("precision"));
    s.recall[k] = ms_from(c.at("recall"));
    s.f1[k] = ms_from(c.at("f1"));
  }
  return s;
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s(buf);
  if (s.starts_with("0.")) {
    s.erase(0, 1);
  } else if (s.starts_with("-0.")) {
    s.erase(1, 1);
  }
  return s;
}

std::string format_mean_sd(const MeanSd &value) {
  return format_score(value.mean) + " ± " + format_score(value.sd);
}

} // namespace kc::stats
