// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/prnn.hpp"

#include <json.hpp>

#include <filesystem>

namespace offaxis::prnn {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  PrnnLayout layout;
  PrnnParams params;
  nlohmann::json metadata = nlohmann::json::object();  // training report, seeds, config hash
};

nlohmann::json model_to_json(const ModelFile& model);
/// ConfigError on a different format version or missing key; IoError when a
/// stored digest does not match the content.
ModelFile model_from_json(const nlohmann::json& j);

void write_model(const std::filesystem::path& file, const ModelFile& model);
ModelFile read_model(const std::filesystem::path& file);

}  // namespace offaxis::prnn
