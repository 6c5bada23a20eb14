// SPDX-License-Identifier: Apache-2.0
#include "offaxis/hashing.hpp"

#include "offaxis/errors.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <limits>

namespace offaxis {

using nlohmann::json;
using namespace constitutive;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * length);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const json& v = j.at(key);
  if (v.is_string()) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError(std::string("key '") + key + "' is not a number");
  }
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

json fiber_to_json(const FiberProperties& p) {
  return {{"model", "fiber"}, {"mu", p.mu}, {"lambda", p.lambda}, {"alpha", p.alpha},
          {"beta", p.beta}, {"gamma", p.gamma}};
}

json matrix_to_json(const MatrixProperties& p) {
  json modes = json::array();
  for (const auto& m : p.modes)
    modes.push_back({{"shear_modulus", m.shear_modulus}, {"viscosity", number(m.viscosity)},
                     {"process", m.process}});
  return {{"model", "matrix"}, {"bulk_modulus", p.bulk_modulus},
          {"hardening_modulus", p.hardening_modulus}, {"activation_stress", p.activation_stress},
          {"modes", modes}};
}

FiberProperties fiber_from_json(const json& j) {
  FiberProperties p;
  p.mu = read_number(j, "mu");
  p.lambda = read_number(j, "lambda");
  p.alpha = read_number(j, "alpha");
  p.beta = read_number(j, "beta");
  p.gamma = read_number(j, "gamma");
  p.validate();
  return p;
}

MatrixProperties matrix_from_json(const json& j) {
  MatrixProperties p;
  p.bulk_modulus = read_number(j, "bulk_modulus");
  p.hardening_modulus = read_number(j, "hardening_modulus");
  if (!j.contains("activation_stress") || !j.contains("modes"))
    throw ConfigError("matrix properties need 'activation_stress' and 'modes'");
  p.activation_stress = j.at("activation_stress").get<std::vector<double>>();
  for (const auto& m : j.at("modes")) {
    MaxwellMode mode;
    mode.shear_modulus = read_number(m, "shear_modulus");
    mode.viscosity = read_number(m, "viscosity");
    mode.process = m.at("process").get<std::size_t>();
    p.modes.push_back(mode);
  }
  p.validate();
  return p;
}

json properties_to_json(const ModelProperties& props) {
  if (const auto* f = std::get_if<FiberProperties>(&props)) return fiber_to_json(*f);
  return matrix_to_json(std::get<MatrixProperties>(props));
}

ModelProperties properties_from_json(const json& j) {
  const std::string model = j.value("model", "");
  if (model == "fiber") return fiber_from_json(j);
  if (model == "matrix") return matrix_from_json(j);
  throw ConfigError("unknown material model '" + model + "'");
}

std::string properties_hash(const FiberProperties& fiber, const MatrixProperties& matrix) {
  const json j = {{"fiber", fiber_to_json(fiber)}, {"matrix", matrix_to_json(matrix)}};
  return sha256_hex(j.dump());
}

}  // namespace offaxis
