// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/pathgen.hpp"

#include <variant>

namespace offaxis::protocol {

/// Constant engineering strain rate along y.
struct CsrLoading {
  double strain_rate = 1e-4;    // 1/s
  double target_strain = 0.05;
  double duration = 0.0;        // s, only read when strain_rate == 0
};

/// Engineering stress ramp then hold along y.
struct CreepLoading {
  pathgen::CreepProtocol protocol;
};

using Loading = std::variant<CsrLoading, CreepLoading>;

}  // namespace offaxis::protocol
