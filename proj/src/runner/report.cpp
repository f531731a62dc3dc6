// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "kc/error.hpp"
#include "kc/io.hpp"
#include "kc/runner.hpp"

namespace kc::runner {

namespace fs = std::filesystem;

namespace {

constexpr const char *kBestMarker = "*";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Index of the largest mean; the first one wins ties.
std::size_t best_index(const std::vector<stats::MeanSd> &column) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < column.size(); ++i) {
    if (column[i].mean > column[best].mean) best = i;
  }
  return best;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string> &cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += '\n';
    };
    line(header);
    for (const auto &r : rows) line(r);
    return out;
  }

  // Column widths count code points so "±" lines up.
  std::string text() const {
    auto width = [](const std::string &s) {
      std::size_t w = 0;
      for (unsigned char c : s) w += (c & 0xC0) != 0x80;
      return w;
    };
    std::vector<std::size_t> w(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      w[c] = width(header[c]);
      for (const auto &r : rows) w[c] = std::max(w[c], width(r[c]));
    }
    std::string out;
    auto line = [&](const std::vector<std::string> &cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        out += cells[c];
        if (c + 1 < cells.size()) out += std::string(w[c] - width(cells[c]) + 2, ' ');
      }
      out += '\n';
    };
    line(header);
    for (const auto &r : rows) line(r);
    return out;
  }
};

Table mean_sd_table(const std::vector<std::string> &names, const std::vector<std::string> &columns,
                    const std::vector<std::vector<stats::MeanSd>> &values) {
  Table t;
  t.header.push_back("model");
  t.header.insert(t.header.end(), columns.begin(), columns.end());
  for (std::size_t m = 0; m < names.size(); ++m) t.rows.push_back({names[m]});
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<stats::MeanSd> column;
    for (std::size_t m = 0; m < names.size(); ++m) column.push_back(values[m][c]);
    const auto best = best_index(column);
    for (std::size_t m = 0; m < names.size(); ++m) {
      auto cell = stats::format_mean_sd(column[m]);
      if (m == best) cell += kBestMarker;
      t.rows[m].push_back(cell);
    }
  }
  return t;
}

} // namespace

std::string report(std::span<const fs::path> run_dirs, const fs::path &out_dir) {
  if (run_dirs.empty()) throw ValidationError("report needs at least one run directory");
  std::vector<std::string> missing;
  for (const auto &d : run_dirs) {
    for (const char *name : {"config.json", "foldplan.json", "summary.json"}) {
      if (!fs::is_regular_file(d / name)) missing.push_back((d / name).string());
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing artifacts:";
    for (const auto &m : missing) msg += "\n  " + m;
    throw ValidationError(msg);
  }
  std::vector<RunSummary> runs;
  std::vector<std::string> names;
  for (const auto &d : run_dirs) {
    runs.push_back(load_run(d));
    names.push_back(runs.back().name);
  }

  std::vector<std::vector<stats::MeanSd>> overall;
  for (const auto &r : runs) {
    overall.push_back({r.summary.accuracy, r.summary.macro_f1, r.summary.weighted_f1});
  }
  const auto main_table =
      mean_sd_table(names, {"accuracy", "macro_f1", "weighted_f1"}, overall);
  write_text_file(out_dir / "table2.csv", main_table.csv());
  std::string text = main_table.text();

  for (auto label : kAllLabels) {
    const auto k = index_of(label);
    std::vector<std::vector<stats::MeanSd>> values;
    for (const auto &r : runs) {
      values.push_back({r.summary.precision[k], r.summary.recall[k], r.summary.f1[k]});
    }
    const auto t = mean_sd_table(names, {"precision", "recall", "f1"}, values);
    write_text_file(out_dir / ("per_class_" + std::string(label_name(label)) + ".csv"), t.csv());
    text += "\n" + std::string(label_name(label)) + "\n" + t.text();
  }

  std::string dist = "model,fold,macro_f1\n";
  for (const auto &r : runs) {
    for (const auto &m : r.per_fold) {
      dist += r.name + ',' + std::to_string(m.fold_idx) + ',' + g17(m.macro_f1) + '\n';
    }
  }
  write_text_file(out_dir / "cv_macro_f1.csv", dist);

  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const auto &a = runs[i];
    const auto &b = runs[i + 1];
    if (a.foldplan_hash != b.foldplan_hash) continue;
    const auto ba = stats::bland_altman(a.fold_macro_f1(), b.fold_macro_f1());
    std::string csv = "model_a,model_b,fold,mean,difference,bias,loa_low,loa_high\n";
    for (std::size_t f = 0; f < ba.points.size(); ++f) {
      csv += a.name + ',' + b.name + ',' + std::to_string(f) + ',' + g17(ba.points[f].first) +
             ',' + g17(ba.points[f].second) + ',' + g17(ba.bias) + ',' + g17(ba.loa_low) + ',' +
             g17(ba.loa_high) + '\n';
    }
    write_text_file(out_dir / ("bland_altman_" + std::to_string(i) + "_" +
                               std::to_string(i + 1) + ".csv"),
                    csv);
  }
  write_text_file(out_dir / "report.txt", text);
  return text;
}

} // namespace kc::runner
