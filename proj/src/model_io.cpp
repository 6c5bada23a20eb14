// SPDX-License-Identifier: Apache-2.0
#include "offaxis/model_io.hpp"

#include "offaxis/errors.hpp"
#include "offaxis/hashing.hpp"

#include <fstream>
#include <sstream>

namespace offaxis::prnn {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("model file: missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

nlohmann::json model_to_json(const ModelFile& model) {
  nlohmann::json points = nlohmann::json::array();
  for (auto p : model.layout.points) points.push_back(p == PointModel::Fiber ? "fiber" : "matrix");
  return {
      {"format_version", kModelFormatVersion},
      {"layout", {{"points", points}}},
      {"properties", {{"fiber", fiber_to_json(model.layout.fiber)}, {"matrix", matrix_to_json(model.layout.matrix)}}},
      {"properties_hash", properties_hash(model.layout.fiber, model.layout.matrix)},
      {"parameters", model.params.values},
      {"parameters_sha256", model.params.sha256()},
      {"metadata", model.metadata},
  };
}

ModelFile model_from_json(const nlohmann::json& j) {
  const auto& version = require(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
    throw ConfigError("model file format version " + version.dump() + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  ModelFile m;
  try {
    for (const auto& p : require(require(j, "layout"), "points")) {
      const auto s = p.get<std::string>();
      if (s == "fiber")
        m.layout.points.push_back(PointModel::Fiber);
      else if (s == "matrix")
        m.layout.points.push_back(PointModel::Matrix);
      else
        throw ConfigError("model file: unknown point model '" + s + "'");
    }
    const auto& props = require(j, "properties");
    m.layout.fiber = fiber_from_json(require(props, "fiber"));
    m.layout.matrix = matrix_from_json(require(props, "matrix"));
    m.params.values = require(j, "parameters").get<std::vector<double>>();
    if (j.contains("metadata")) m.metadata = j.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
  if (m.params.values.size() != kParamsPerPoint * m.layout.size())
    throw ConfigError("model file: parameter count does not match the layout");
  if (require(j, "parameters_sha256").get<std::string>() != m.params.sha256())
    throw IoError("model file: parameter digest mismatch");
  if (require(j, "properties_hash").get<std::string>() != properties_hash(m.layout.fiber, m.layout.matrix))
    throw IoError("model file: properties digest mismatch");
  return m;
}

void write_model(const std::filesystem::path& file, const ModelFile& model) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + file.string());
}

ModelFile read_model(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(file.string() + ": not a model file (" + e.what() + ")");
  }
  return model_from_json(j);
}

}  // namespace offaxis::prnn
