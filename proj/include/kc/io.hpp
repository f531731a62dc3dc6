// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace kc {

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);

nlohmann::json read_json_file(const std::filesystem::path &path);
/// Pretty-printed with a trailing newline; key order is sorted, so output is
/// a deterministic function of the value.
void write_json_file(const std::filesystem::path &path, const nlohmann::json &value);

/**
 * Parameter blob: one line of JSON header, then the parameters as raw
 * little-endian IEEE-754 float64. The header always carries "n_params".
 */
struct ParamBlob {
  nlohmann::json header;
  std::vector<double> params;
};

void write_param_blob(const std::filesystem::path &path, const nlohmann::json &header,
                      std::span<const double> params);
ParamBlob read_param_blob(const std::filesystem::path &path);

} // namespace kc
