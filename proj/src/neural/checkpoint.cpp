// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "kc/io.hpp"
#include "kc/neural.hpp"

namespace kc::neural {

void save_checkpoint(const std::filesystem::path &path, const Model &model) {
  const nlohmann::json header = {{"format", "kc-neural-v1"},
                                 {"K", kNumClasses},
                                 {"encoder", model.config().to_json()}};
  write_param_blob(path, header, model.params());
}

Model load_checkpoint(const std::filesystem::path &path) {
  const auto blob = read_param_blob(path);
  if (blob.header.value("format", std::string()) != "kc-neural-v1") {
    throw ValidationError("'" + path.string() + "' is not a neural checkpoint");
  }
  Model model(EncoderConfig::from_json(blob.header.at("encoder")));
  if (blob.params.size() != model.params().size()) {
    throw ValidationError("'" + path.string() + "': expected " +
                          std::to_string(model.params().size()) + " parameters, found " +
                          std::to_string(blob.params.size()));
  }
  std::ranges::copy(blob.params, model.params().begin());
  return model;
}

} // namespace kc::neural
