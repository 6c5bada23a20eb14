// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/constitutive.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace offaxis {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Canonical JSON of a property set. Infinite viscosities are written as "inf".
nlohmann::json properties_to_json(const constitutive::ModelProperties& props);
constitutive::ModelProperties properties_from_json(const nlohmann::json& j);

nlohmann::json fiber_to_json(const constitutive::FiberProperties& p);
nlohmann::json matrix_to_json(const constitutive::MatrixProperties& p);
constitutive::FiberProperties fiber_from_json(const nlohmann::json& j);
constitutive::MatrixProperties matrix_from_json(const nlohmann::json& j);

/// Hash of the canonical JSON of the fiber/matrix pair.
std::string properties_hash(const constitutive::FiberProperties& fiber,
                            const constitutive::MatrixProperties& matrix);

}  // namespace offaxis
