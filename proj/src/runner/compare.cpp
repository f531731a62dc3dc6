// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <set>

#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/rng.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> RunSummary::fold_macro_f1() const {
  std::vector<double> out;
  out.reserve(per_fold.size());
  for (const auto &m : per_fold) out.push_back(m.macro_f1);
  return out;
}

RunSummary load_run(const fs::path &run_dir) {
  std::vector<std::string> missing;
  for (const char *name : {"config.json", "foldplan.json", "summary.json"}) {
    if (!fs::is_regular_file(run_dir / name)) missing.push_back((run_dir / name).string());
  }
  if (!missing.empty()) {
    std::string msg = "run " + run_dir.string() + " is missing:";
    for (const auto &m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  const auto summary = read_json_file(run_dir / "summary.json");
  const auto plan = corpus::FoldPlan::from_json(read_json_file(run_dir / "foldplan.json"));
  RunSummary r;
  r.dir = run_dir;
  try {
    r.name = summary.at("name").get<std::string>();
    r.model = summary.at("model").get<std::string>();
    r.foldplan_hash = summary.at("foldplan_hash").get<std::string>();
    for (const auto &f : summary.at("per_fold")) r.per_fold.push_back(stats::FoldMetrics::from_json(f));
    r.summary = stats::CvSummary::from_json(summary.at("summary"));
  } catch (const json::exception &e) {
    throw ValidationError("run " + run_dir.string() + ": malformed summary.json: " + e.what());
  }
  if (r.foldplan_hash != plan.hash()) {
    throw ValidationError("run " + run_dir.string() + ": foldplan.json does not match its summary");
  }
  if (r.per_fold.size() != plan.n_folds) {
    throw ValidationError("run " + run_dir.string() + ": summary has " +
                          std::to_string(r.per_fold.size()) + " folds, plan has " +
                          std::to_string(plan.n_folds));
  }
  return r;
}

namespace {

// Display names must be unique for the pairwise table.
std::vector<std::string> display_names(std::span<const RunSummary> runs) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto &r : runs) {
    std::string name = r.name;
    for (int i = 2; seen.contains(name); ++i) name = r.name + " (" + std::to_string(i) + ")";
    seen.insert(name);
    names.push_back(name);
  }
  return names;
}

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string fixed(const std::optional<double> &v, int decimals) {
  return v ? fixed(*v, decimals) : std::string{};
}

} // namespace

ComparisonTable compare_models(std::span<const RunSummary> runs, const CompareOptions &options) {
  if (runs.size() < 2) throw ValidationError("comparison needs at least two runs");
  for (const auto &r : runs) {
    if (r.foldplan_hash != runs[0].foldplan_hash) {
      throw ValidationError("fold plans differ: " + runs[0].dir.string() + " has " +
                            runs[0].foldplan_hash + ", " + r.dir.string() + " has " +
                            r.foldplan_hash + "; paired tests need identical folds");
    }
  }
  const auto names = display_names(runs);
  std::vector<std::vector<double>> scores;
  for (const auto &r : runs) scores.push_back(r.fold_macro_f1());

  ComparisonTable table;
  const std::size_t n_folds = scores[0].size();
  std::vector<std::vector<double>> by_fold(n_folds, std::vector<double>(runs.size()));
  for (std::size_t m = 0; m < runs.size(); ++m) {
    for (std::size_t f = 0; f < n_folds; ++f) by_fold[f][m] = scores[m][f];
  }
  try {
    table.friedman = stats::friedman_test(by_fold);
  } catch (const DegenerateInputError &) {
    table.friedman.reset();
  }

  std::uint64_t stream = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      table.pairs.push_back(stats::compare_pair(names[i], scores[i], names[j], scores[j],
                                                options.tests, options.bootstrap_resamples,
                                                mix_seed(options.seed, stream++)));
    }
  }
  std::vector<double> raw;
  for (const auto &p : table.pairs) raw.push_back(p.p_primary);
  const auto adjusted =
      options.correction == Correction::Holm ? stats::holm_correction(raw) : raw;
  for (std::size_t i = 0; i < table.pairs.size(); ++i) table.pairs[i].set_adjusted(adjusted[i]);

  for (std::size_t m = 0; m < runs.size(); ++m) {
    ModelInterval iv;
    iv.name = names[m];
    iv.mean = stats::mean_sd(scores[m]).mean;
    iv.ci95 = stats::bootstrap_ci(scores[m], options.bootstrap_resamples, 0.95,
                                  mix_seed(options.seed, 1'000'000 + m));
    table.intervals.push_back(iv);
  }
  for (auto [a, b] : options.bland_altman_pairs) {
    if (a >= runs.size() || b >= runs.size()) {
      throw ValidationError("Bland-Altman pair index out of range");
    }
    table.bland_altman.push_back({names[a], names[b], stats::bland_altman(scores[a], scores[b])});
  }
  return table;
}

ComparisonTable compare_models(std::span<const fs::path> run_dirs, const CompareOptions &options) {
  std::vector<RunSummary> runs;
  for (const auto &d : run_dirs) runs.push_back(load_run(d));
  return compare_models(runs, options);
}

json ComparisonTable::to_json() const {
  json j;
  if (friedman) {
    j["friedman"] = {{"chi2", friedman->chi2},
                     {"df", friedman->df},
                     {"p", friedman->p},
                     {"all_tied", friedman->all_tied}};
  } else {
    j["friedman"] = nullptr;
  }
  j["pairs"] = json::array();
  for (const auto &p : pairs) j["pairs"].push_back(p.to_json());
  j["models"] = json::array();
  for (const auto &iv : intervals) {
    j["models"].push_back(
        {{"name", iv.name}, {"mean_macro_f1", iv.mean}, {"ci95", {iv.ci95.first, iv.ci95.second}}});
  }
  j["bland_altman"] = json::array();
  for (const auto &ba : bland_altman) {
    json pts = json::array();
    for (auto [m, d] : ba.result.points) pts.push_back({m, d});
    j["bland_altman"].push_back({{"model_a", ba.model_a},
                                 {"model_b", ba.model_b},
                                 {"bias", ba.result.bias},
                                 {"loa_low", ba.result.loa_low},
                                 {"loa_high", ba.result.loa_high},
                                 {"points", pts}});
  }
  return j;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "model_a,model_b,delta,p_wilcoxon,cohens_d,p_adjusted,p_ttest,verdict\n";
  for (const auto &p : pairs) {
    out += p.model_a + ',' + p.model_b + ',' + fixed(p.delta_mean, 4) + ',' +
           fixed(p.p_wilcoxon, 4) + ',' + fixed(p.cohens_d, 3) + ',' + fixed(p.p_adjusted, 4) +
           ',' + fixed(p.p_ttest, 4) + ',' + p.verdict + '\n';
  }
  return out;
}

void write_comparison(const ComparisonTable &table, const fs::path &out_dir) {
  write_json_file(out_dir / "comparison.json", table.to_json());
  write_text_file(out_dir / "comparison.csv", table.to_csv());
}

} // namespace kc::runner
