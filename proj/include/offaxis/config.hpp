// SPDX-License-Identifier: Apache-2.0
//
// TOML run configuration. Keys are dotted paths ("coupon.angle"); a missing
// or mistyped key raises ConfigError naming the key.
#pragma once

#include "offaxis/evaluator.hpp"
#include "offaxis/macrosolver.hpp"
#include "offaxis/pathgen.hpp"
#include "offaxis/prnn_train.hpp"
#include "offaxis/singlescale.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace offaxis::config {

class Config {
 public:
  /// IoError when the file cannot be read, ConfigError on a syntax error.
  static Config load(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});
  /// `overrides` are "dotted.key=value" with a TOML value (bare words are strings).
  static Config parse(std::string_view text, const std::vector<std::string>& overrides = {},
                      const std::filesystem::path& base_dir = ".");

  /// Canonical TOML of the effective configuration and its SHA-256.
  std::string canonical() const;
  std::string hash() const;

  bool has(std::string_view key) const;
  bool is_string(std::string_view key) const;
  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  std::int64_t integer(std::string_view key) const;
  std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
  std::size_t count(std::string_view key) const;  // non-negative integer
  std::size_t count_or(std::string_view key, std::size_t fallback) const;
  bool boolean_or(std::string_view key, bool fallback) const;
  std::string string(std::string_view key) const;
  std::string string_or(std::string_view key, const std::string& fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  std::vector<std::size_t> counts(std::string_view key) const;
  /// Array-of-tables entries as standalone configs.
  std::vector<Config> tables(std::string_view key) const;
  Config section(std::string_view key) const;

  /// Paths in the config are relative to the file that holds them.
  std::filesystem::path resolve(const std::string& path) const;

 private:
  struct Impl;
  explicit Config(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct Calibration {
  constitutive::FiberProperties fiber;
  constitutive::MatrixProperties matrix;
  double fiber_fraction = 0.6;
};

/// [material]: fiber_fraction, [material.fiber], [material.matrix] with
/// [[material.matrix.processes]] each holding activation_stress and modes.
Calibration calibration(const Config& c);

/// [model] kind = "voigt" | "prnn" | "rve"; prnn reads model.file.
std::unique_ptr<evaluator::LocalLaw> make_law(const Config& c);

/// [coupon]; oblique_angle may be "auto" (computed from the law's compliance).
macro::CouponSpec coupon(const Config& c, const evaluator::LocalLaw& law);
/// [loading] kind = "csr" | "creep".
protocol::Loading loading(const Config& c);
/// [stepping] with protocol-dependent defaults: about 100 steps to the CSR
/// target, creep dt_max 1e4 s.
stepping::AdaptiveStepping stepping(const Config& c, const protocol::Loading& loading);
macro::SolverSettings solver(const Config& c);

macro::MacroProblem macro_problem(const Config& c, const evaluator::LocalLaw& law);
singlescale::SinglePointProblem single_problem(const Config& c);

/// [paths]; the seed comes from the command line. `count` replaces paths.count.
pathgen::PathSpec paths(const Config& c, std::uint64_t seed, std::optional<std::size_t> count = {});
/// [training]
prnn::TrainSpec training(const Config& c, std::uint64_t seed);

}  // namespace offaxis::config
