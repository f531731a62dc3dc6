// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>

#include "kc/corpus.hpp"
#include "kc/error.hpp"
#include "kc/io.hpp"

namespace kc::corpus {

Dataset::Dataset(std::vector<LabeledExample> examples) : examples_(std::move(examples)) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto &ex = examples_[i];
    if (!index_.emplace(ex.id, i).second) {
      throw ValidationError("duplicate id '" + ex.id + "' at record " + std::to_string(i));
    }
    ++class_counts_[index_of(ex.label)];
  }
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledExample> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) {
    out.push_back(examples_.at(i));
  }
  return Dataset(std::move(out));
}

namespace {

struct RawRecord {
  std::optional<std::string> id;
  std::optional<std::string> text;
  std::optional<std::string> label;
  std::optional<std::string> source;
};

// RFC 4180 style: quoted fields may contain separators, newlines and "" escapes.
std::vector<std::vector<std::string>> parse_csv(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (content.starts_with("\xEF\xBB\xBF")) {
    i = 3;
  }
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) {
      rows.push_back(std::move(row));
    }
    row.clear();
  };
  for (; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // CRLF line ends; stray CR is dropped
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) {
    throw ValidationError("CSV: unterminated quoted field");
  }
  if (field_started || !row.empty()) {
    end_row();
  }
  return rows;
}

std::vector<RawRecord> read_csv(std::string_view content) {
  const auto rows = parse_csv(content);
  if (rows.empty()) {
    return {};
  }
  std::optional<std::size_t> c_id, c_text, c_label, c_source;
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    std::string name = rows[0][c];
    std::ranges::transform(name, name.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (name == "id") {
      c_id = c;
    } else if (name == "text") {
      c_text = c;
    } else if (name == "label") {
      c_label = c;
    } else if (name == "source") {
      c_source = c;
    }
  }
  if (!c_text || !c_label) {
    throw ValidationError("CSV header must contain 'text' and 'label' columns");
  }
  std::vector<RawRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    auto get = [&](std::optional<std::size_t> col) -> std::optional<std::string> {
      if (!col || *col >= row.size()) {
        return std::nullopt;
      }
      return row[*col];
    };
    RawRecord rec{get(c_id), get(c_text), get(c_label), get(c_source)};
    if (rec.id && rec.id->empty()) {
      rec.id.reset();
    }
    if (rec.source && rec.source->empty()) {
      rec.source.reset();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RawRecord> read_jsonl(std::string_view content) {
  std::vector<RawRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = content.size();
    }
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ValidationError("JSONL line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw ValidationError("JSONL line " + std::to_string(line_no) + ": not an object");
    }
    auto get = [&](const char *key) -> std::optional<std::string> {
      const auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        return std::nullopt;
      }
      if (it->is_string()) {
        return it->get<std::string>();
      }
      return it->dump();
    };
    out.push_back({get("id"), get("text"), get("label"), get("source")});
  }
  return out;
}

Dataset build(std::vector<RawRecord> records) {
  std::vector<LabeledExample> examples;
  examples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto &rec = records[i];
    const std::string where = "record " + std::to_string(i);
    if (!rec.text) {
      throw ValidationError(where + ": missing 'text'");
    }
    if (!rec.label) {
      throw ValidationError(where + ": missing 'label'");
    }
    const auto label = parse_label(*rec.label);
    if (!label) {
      throw ValidationError(where + ": unknown label '" + *rec.label + "'");
    }
    Source source = Source::Unknown;
    if (rec.source) {
      const auto s = parse_source(*rec.source);
      if (!s) {
        throw ValidationError(where + ": unknown source '" + *rec.source + "'");
      }
      source = *s;
    }
    LabeledExample ex;
    ex.id = rec.id ? *rec.id : "row-" + std::to_string(i);
    ex.normalized_text = normalize_text(*rec.text);
    ex.raw_text = std::move(*rec.text);
    ex.label = *label;
    ex.source = source;
    examples.push_back(std::move(ex));
  }
  return Dataset(std::move(examples));
}

} // namespace

Dataset ingest_string(std::string_view content, Format format) {
  return build(format == Format::Csv ? read_csv(content) : read_jsonl(content));
}

Dataset ingest(const std::filesystem::path &path, Format format) {
  return ingest_string(read_text_file(path), format);
}

std::string to_jsonl(const Dataset &data) {
  std::string out;
  for (const auto &ex : data.examples()) {
    nlohmann::json j = {{"id", ex.id},
                        {"text", ex.raw_text},
                        {"label", label_name(ex.label)},
                        {"source", source_name(ex.source)}};
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

} // namespace kc::corpus
