// SPDX-License-Identifier: Apache-2.0
//
// Proportional random load paths for training and testing the surrogate.
#pragma once

#include "offaxis/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace offaxis::pathgen {

struct LoadStep {
  Tensor2 stretch = Tensor2::Identity();  // local-frame U, symmetric
  double dt = 1.0;                         // s
};

/// Ordered stretch history; the first step is always U = I.
struct LoadPath {
  std::vector<LoadStep> steps;
  std::size_t size() const { return steps.size(); }
};

struct TimeStepRule {
  enum class Kind { Fixed, LogUniform };
  Kind kind = Kind::Fixed;
  double value = 1.0;  // Fixed
  double lower = 1e-3; // LogUniform bounds, s
  double upper = 1e3;

  static TimeStepRule fixed(double dt) { return {Kind::Fixed, dt, dt, dt}; }
  static TimeStepRule log_uniform(double lower, double upper) {
    return {Kind::LogUniform, 0.0, lower, upper};
  }
};

struct PathSpec {
  std::size_t count = 1;
  std::size_t steps = 60;               // increments after the initial U = I record
  double length_scale_fraction = 0.2;   // GP length scale / steps
  double amplitude_cap = 0.08;          // bound on max |U - I| entry
  TimeStepRule time_step = TimeStepRule::fixed(1.0);
  std::uint64_t seed = 0;
  std::size_t max_retries = 50;

  void validate() const;
};

/// U_t = I + m(t) D with D a fixed unit direction in the six stretch
/// components and m a zero-mean squared-exponential GP sample, pinned to
/// m(0) = 0 and rescaled under the amplitude cap. One dt per path.
/// Throws DomainError for an invalid spec or when retries are exhausted.
std::vector<LoadPath> sample_paths(const PathSpec& spec);
LoadPath sample_path(const PathSpec& spec, std::size_t index);

/// Stress-controlled creep: ramp at a constant engineering stress rate, then hold.
struct CreepProtocol {
  double target = 0.0;  // MPa
  double rate = 0.0;    // MPa/s; +inf applies the target in one step
  double hold = 0.0;    // s

  /// min(previous + rate dt, target)
  double next_stress(double previous, double dt) const;
  double ramp_duration() const;
  double total_duration() const { return ramp_duration() + hold; }
};

/// Throws DomainError unless rate > 0, hold > 0 and target is finite.
CreepProtocol creep_path(double target, double rate, double hold);

}  // namespace offaxis::pathgen
