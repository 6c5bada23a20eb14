// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace offaxis {

/// Input outside the mathematical domain of an operation (bad angle, det F <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (mismatched state, asymmetric stress, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative solver failed to converge.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual = 0.0, int index = -1)
      : std::runtime_error(what), residual_(residual), index_(index) {}

  double residual() const noexcept { return residual_; }
  /// Mode, point or step index the failure refers to; -1 when not applicable.
  int index() const noexcept { return index_; }

 private:
  double residual_;
  int index_;
};

/// Configuration problems: missing keys, bad values, version mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace offaxis
