// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kc;

namespace {

corpus::Format format_or_throw(const std::string &name) {
  const auto f = corpus::parse_format(name);
  if (!f) throw ValidationError("unknown format '" + name + "' (csv or jsonl)");
  return *f;
}

json class_counts_json(const ClassCounts &counts) {
  json j = json::object();
  for (auto l : kAllLabels) j[std::string(label_name(l))] = counts[index_of(l)];
  return j;
}

std::vector<std::size_t> parse_index_list(const std::string &text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception &) {
      throw ValidationError("bad index '" + item + "'");
    }
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"kc: knowledge-construction comment classification experiments"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_file, ingest_format = "jsonl", ingest_out;
  auto *ingest = app.add_subcommand("ingest", "Validate and normalize a labeled corpus");
  ingest->add_option("file", ingest_file, "CSV or JSONL corpus")->required();
  ingest->add_option("--format", ingest_format, "csv or jsonl");
  ingest->add_option("--out", ingest_out, "Write the normalized corpus as JSONL");

  // split
  std::string split_file, split_format = "jsonl", split_out;
  std::size_t split_folds = 10;
  std::uint64_t split_seed = 42;
  auto *split = app.add_subcommand("split", "Write a stratified fold plan");
  split->add_option("file", split_file, "Corpus file")->required();
  split->add_option("--format", split_format, "csv or jsonl");
  split->add_option("--folds", split_folds, "Number of folds");
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out", split_out, "Fold plan JSON path (stdout when omitted)");

  // train
  std::string train_model, train_config, train_out, train_dataset, train_name;
  std::optional<std::size_t> train_folds;
  std::optional<std::uint64_t> train_seed;
  bool no_focal = false, no_ls = false, no_rdrop = false;
  auto *train = app.add_subcommand("train", "Cross-validated training run");
  train->add_option("--model", train_model, "tfidf-lr, tfidf-svm or neural")->required();
  train->add_option("--config", train_config, "Experiment config JSON");
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--dataset", train_dataset, "Corpus path (overrides the config)");
  train->add_option("--name", train_name, "Run name (overrides the config)");
  train->add_option("--folds", train_folds, "Fold count (overrides the config)");
  train->add_option("--seed", train_seed, "Experiment seed (overrides the config)");
  train->add_flag("--no-focal", no_focal, "Ablation: gamma = 0");
  train->add_flag("--no-ls", no_ls, "Ablation: epsilon = 0");
  train->add_flag("--no-rdrop", no_rdrop, "Ablation: lambda_rd = 0");

  // compare
  std::vector<std::string> compare_dirs;
  std::string correction = "holm", tests = "ttest,wilcoxon", compare_out, ba_pairs;
  std::size_t bootstrap = 10000;
  std::uint64_t compare_seed = 0;
  auto *compare = app.add_subcommand("compare", "Paired statistical comparison of runs");
  compare->add_option("runs", compare_dirs, "Run directories")->required();
  compare->add_option("--correction", correction, "holm or none");
  compare->add_option("--bootstrap", bootstrap, "Bootstrap resamples");
  compare->add_option("--tests", tests, "Comma list of ttest, wilcoxon");
  compare->add_option("--seed", compare_seed, "Bootstrap seed");
  compare->add_option("--bland-altman", ba_pairs, "Run index pairs, e.g. 0:1,0:2");
  compare->add_option("--out", compare_out, "Directory for comparison.json and comparison.csv");

  // report
  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  auto *rep = app.add_subcommand("report", "Summary tables and plot data for runs");
  rep->add_option("runs", report_dirs, "Run directories")->required();
  rep->add_option("--out", report_out, "Output directory");

  // predict
  std::string predict_run, predict_text, predict_folds;
  auto *predict = app.add_subcommand("predict", "Fold-ensemble prediction for one text");
  predict->add_option("--run", predict_run, "Run directory")->required();
  predict->add_option("--text", predict_text, "Comment text")->required();
  predict->add_option("--folds", predict_folds, "Comma list of fold models to use");

  // synth
  std::size_t synth_per_class = 200;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  auto *synth = app.add_subcommand("synth", "Generate a separable synthetic corpus (JSONL)");
  synth->add_option("--per-class", synth_per_class, "Documents per class");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto data = corpus::ingest(ingest_file, format_or_throw(ingest_format));
      if (!ingest_out.empty()) write_text_file(ingest_out, corpus::to_jsonl(data));
      std::cout << json{{"examples", data.size()}, {"classes", class_counts_json(data.class_counts())}}
                       .dump(2)
                << '\n';
    } else if (*split) {
      const auto data = corpus::ingest(split_file, format_or_throw(split_format));
      const auto plan = corpus::stratified_kfold(data, split_folds, split_seed);
      if (split_out.empty()) {
        std::cout << plan.to_json().dump(2) << '\n';
      } else {
        write_json_file(split_out, plan.to_json());
      }
      std::cerr << "fold plan " << plan.hash() << '\n';
      for (std::size_t f = 0; const auto &c : plan.fold_class_counts(data)) {
        std::cerr << "  fold " << f++ << ": " << class_counts_json(c).dump() << '\n';
      }
    } else if (*train) {
      runner::ExperimentConfig cfg;
      if (!train_config.empty()) cfg = runner::ExperimentConfig::from_json(read_json_file(train_config));
      const auto model = runner::parse_model_type(train_model);
      if (!model) throw ValidationError("unknown model '" + train_model + "'");
      cfg.model = *model;
      if (!train_dataset.empty()) cfg.dataset = train_dataset;
      if (!train_name.empty()) cfg.name = train_name;
      if (train_folds) cfg.n_folds = *train_folds;
      if (train_seed) cfg.seed = *train_seed;
      if (no_focal) runner::apply_ablation(cfg, runner::Ablation::NoFocal);
      if (no_ls) runner::apply_ablation(cfg, runner::Ablation::NoLabelSmoothing);
      if (no_rdrop) runner::apply_ablation(cfg, runner::Ablation::NoRDrop);
      const auto result = runner::run_cv(cfg, train_out);
      std::cout << cfg.name << " (" << runner::model_type_name(cfg.model) << ", "
                << cfg.n_folds << " folds)\n"
                << "  accuracy     " << stats::format_mean_sd(result.summary.accuracy) << '\n'
                << "  macro-F1     " << stats::format_mean_sd(result.summary.macro_f1) << '\n'
                << "  weighted-F1  " << stats::format_mean_sd(result.summary.weighted_f1) << '\n'
                << "  fold plan    " << result.foldplan_hash << '\n';
    } else if (*compare) {
      runner::CompareOptions opt;
      opt.bootstrap_resamples = bootstrap;
      opt.seed = compare_seed;
      if (correction == "holm") {
        opt.correction = runner::Correction::Holm;
      } else if (correction == "none") {
        opt.correction = runner::Correction::None;
      } else {
        throw ValidationError("unknown correction '" + correction + "'");
      }
      opt.tests = {false, false};
      std::stringstream ss(tests);
      for (std::string t; std::getline(ss, t, ',');) {
        if (t == "ttest") {
          opt.tests.ttest = true;
        } else if (t == "wilcoxon") {
          opt.tests.wilcoxon = true;
        } else {
          throw ValidationError("unknown test '" + t + "'");
        }
      }
      std::stringstream ps(ba_pairs);
      for (std::string p; std::getline(ps, p, ',');) {
        const auto colon = p.find(':');
        if (colon == std::string::npos) throw ValidationError("bad Bland-Altman pair '" + p + "'");
        const auto a = parse_index_list(p.substr(0, colon));
        const auto b = parse_index_list(p.substr(colon + 1));
        if (a.size() != 1 || b.size() != 1) throw ValidationError("bad Bland-Altman pair '" + p + "'");
        opt.bland_altman_pairs.emplace_back(a[0], b[0]);
      }
      std::vector<fs::path> dirs(compare_dirs.begin(), compare_dirs.end());
      const auto table = runner::compare_models(dirs, opt);
      if (!compare_out.empty()) runner::write_comparison(table, compare_out);
      if (table.friedman) {
        std::cout << "Friedman chi2 = " << table.friedman->chi2 << ", df = " << table.friedman->df
                  << ", p = " << table.friedman->p << "\n\n";
      }
      std::cout << table.to_csv();
    } else if (*rep) {
      std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
      std::cout << runner::report(dirs, report_out);
    } else if (*predict) {
      const auto subset = parse_index_list(predict_folds);
      const auto models = runner::load_run_models(predict_run, subset);
      const auto pred = runner::ensemble_predict(models, predict_text);
      json probs = json::object();
      for (auto l : kAllLabels) probs[std::string(label_name(l))] = pred.averaged[index_of(l)];
      std::cout << json{{"label", label_name(pred.label)},
                        {"probabilities", probs},
                        {"n_models", pred.members.size()}}
                       .dump(2)
                << '\n';
    } else if (*synth) {
      write_text_file(synth_out, runner::synthetic_corpus_jsonl(synth_per_class, synth_seed));
    }
  } catch (const kc::ValidationError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
