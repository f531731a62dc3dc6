// SPDX-License-Identifier: Apache-2.0
#include "kc/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "kc/error.hpp"

namespace kc {

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure on '" + path.string() + "'");
  }
  return buf.str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("write failure on '" + path.string() + "'");
  }
}

nlohmann::json read_json_file(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ValidationError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path &path, const nlohmann::json &value) {
  write_text_file(path, value.dump(2) + "\n");
}

void write_param_blob(const std::filesystem::path &path, const nlohmann::json &header,
                      std::span<const double> params) {
  nlohmann::json h = header;
  h["n_params"] = params.size();
  std::string out = h.dump() + "\n";
  out.reserve(out.size() + params.size() * 8);
  for (const double v : params) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      out.push_back(static_cast<char>(bits & 0xffU));
      bits >>= 8;
    }
  }
  write_text_file(path, out);
}

ParamBlob read_param_blob(const std::filesystem::path &path) {
  const std::string raw = read_text_file(path);
  const auto eol = raw.find('\n');
  if (eol == std::string::npos) {
    throw ValidationError("'" + path.string() + "': missing parameter header");
  }
  ParamBlob blob;
  try {
    blob.header = nlohmann::json::parse(raw.substr(0, eol));
  } catch (const nlohmann::json::parse_error &e) {
    throw ValidationError("'" + path.string() + "': bad header: " + e.what());
  }
  const auto n = blob.header.value("n_params", std::size_t{0});
  if (raw.size() - eol - 1 != n * 8) {
    throw ValidationError("'" + path.string() + "': expected " + std::to_string(n) +
                          " parameters, payload has " +
                          std::to_string(raw.size() - eol - 1) + " bytes");
  }
  blob.params.resize(n);
  const auto *p = reinterpret_cast<const unsigned char *>(raw.data() + eol + 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | p[i * 8 + static_cast<std::size_t>(b)];
    }
    blob.params[i] = std::bit_cast<double>(bits);
  }
  return blob;
}

} // namespace kc
