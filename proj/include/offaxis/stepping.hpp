// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/errors.hpp"

#include <algorithm>
#include <cstddef>

namespace offaxis::stepping {

struct AdaptiveStepping {
  double dt0 = 1.0;       // s
  double dt_min = 1e-6;
  double dt_max = 1e9;
  double cut = 0.5;
  double growth = 1.2;
  std::size_t growth_after = 5;    // consecutive converged steps before growing
  std::size_t max_newton = 25;
  std::size_t max_cuts = 8;        // consecutive cuts before giving up

  void validate() const {
    if (!(dt_min > 0.0) || !(dt_min <= dt0) || !(dt0 <= dt_max))
      throw ConfigError("stepping: need 0 < dt_min <= dt0 <= dt_max");
    if (!(cut > 0.0 && cut < 1.0)) throw ConfigError("stepping: cut factor must lie in (0, 1)");
    if (!(growth > 1.0)) throw ConfigError("stepping: growth factor must exceed 1");
    if (max_newton == 0) throw ConfigError("stepping: max_newton must be positive");
  }
};

/// Step-size bookkeeping: cut on failure, grow after a run of successes.
class StepController {
 public:
  explicit StepController(const AdaptiveStepping& s) : s_(s), dt_(s.dt0) { s.validate(); }

  /// Proposed increment, clipped so that `time` does not pass `end`.
  double propose(double time, double end) const { return std::min(dt_, end - time); }

  void accepted() {
    cuts_ = 0;
    if (++streak_ >= s_.growth_after) {
      dt_ = std::min(dt_ * s_.growth, s_.dt_max);
      streak_ = 0;
    }
  }

  /// Returns false when the run must stop.
  bool rejected(double attempted) {
    streak_ = 0;
    ++cuts_;
    ++total_cuts_;
    dt_ = attempted * s_.cut;
    return cuts_ <= s_.max_cuts && dt_ >= s_.dt_min;
  }

  double dt() const { return dt_; }
  std::size_t total_cuts() const { return total_cuts_; }

 private:
  AdaptiveStepping s_;
  double dt_;
  std::size_t streak_ = 0;
  std::size_t cuts_ = 0;
  std::size_t total_cuts_ = 0;
};

}  // namespace offaxis::stepping
