// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "kc/corpus.hpp"
#include "kc/error.hpp"
#include "kc/rng.hpp"

namespace kc::corpus {

std::size_t FoldPlan::fold_of(std::string_view id) const {
  const auto it = assignment.find(std::string(id));
  if (it == assignment.end()) {
    throw ValidationError("id '" + std::string(id) + "' is not in the fold plan");
  }
  return it->second;
}

std::vector<std::size_t> FoldPlan::fold_indices(const Dataset &data, std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (fold_of(data[i].id) == fold) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement_indices(const Dataset &data,
                                                      std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (fold_of(data[i].id) != fold) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<ClassCounts> FoldPlan::fold_class_counts(const Dataset &data) const {
  std::vector<ClassCounts> counts(n_folds, ClassCounts{});
  for (const auto &ex : data.examples()) {
    ++counts.at(fold_of(ex.id))[index_of(ex.label)];
  }
  return counts;
}

nlohmann::json FoldPlan::to_json() const {
  nlohmann::json assign = nlohmann::json::object();
  for (const auto &[id, fold] : assignment) {
    assign[id] = fold;
  }
  return {{"n_folds", n_folds}, {"seed", seed}, {"assignment", assign}};
}

FoldPlan FoldPlan::from_json(const nlohmann::json &j) {
  FoldPlan plan;
  try {
    plan.n_folds = j.at("n_folds").get<std::size_t>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto &[id, fold] : j.at("assignment").items()) {
      const auto f = fold.get<std::size_t>();
      if (f >= plan.n_folds) {
        throw ValidationError("fold plan: id '" + id + "' assigned to fold " +
                              std::to_string(f) + " >= n_folds");
      }
      plan.assignment.emplace(id, f);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("fold plan: ") + e.what());
  }
  return plan;
}

std::string FoldPlan::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

FoldPlan stratified_kfold(const Dataset &data, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) {
    throw ValidationError("n_folds must be >= 2, got " + std::to_string(n_folds));
  }
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < data.size(); ++i) {
    members[index_of(data[i].label)].push_back(i);
  }
  for (const KCLabel label : kAllLabels) {
    const auto n = members[index_of(label)].size();
    if (n > 0 && n < n_folds) {
      throw ValidationError("class " + std::string(label_name(label)) + " has " +
                            std::to_string(n) + " members, fewer than n_folds = " +
                            std::to_string(n_folds));
    }
  }

  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  Rng rng(seed);
  std::size_t offset = 0;
  for (auto &idx : members) {
    rng.shuffle(std::span(idx));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      plan.assignment.emplace(data[idx[r]].id, (offset + r) % n_folds);
    }
    offset = (offset + idx.size()) % n_folds;
  }
  return plan;
}

} // namespace kc::corpus
