// SPDX-License-Identifier: Apache-2.0
//
// Plot-ready output: engineering curves as CSV, element fields as legacy
// ASCII VTK. Every file starts with its provenance (config hash, seed).
#pragma once

#include "offaxis/macrosolver.hpp"
#include "offaxis/singlescale.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace offaxis::io {

struct Provenance {
  std::string config_hash;
  std::optional<std::uint64_t> seed;

  /// "config_sha256=<hash> seed=<seed|none>"
  std::string line() const;
};

struct CurveRow {
  double time = 0.0;
  double eps_yy = 0.0;
  double sig_yy = 0.0;
  double sig_xy = 0.0;
};

inline constexpr const char* kCurveHeader = "time_s, eps_yy_eng, sig_yy_eng, sig_xy_eng";

std::vector<CurveRow> curve_rows(const macro::MacroResult& result);
std::vector<CurveRow> curve_rows(const singlescale::Curve& curve);

/// '#' provenance line, the header, then one row per point with 17 significant digits.
void write_curve_csv(const std::filesystem::path& file, const std::vector<CurveRow>& rows, const Provenance& p);
/// Comment lines are skipped; IoError on a foreign header or malformed row.
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& file);

/// Unstructured grid of the reference mesh with cell data eps_yy_eng,
/// sig_yy_eng, sig_xy_eng (nominal) and phi_deg. ContractViolation when the
/// frame carries no fields for this mesh.
void write_vtk(const std::filesystem::path& file, const macro::MacroMesh& mesh, const macro::FieldFrame& frame,
               const Provenance& p);

/// Generic table: provenance, header, rows.
void write_table_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows, const Provenance& p);

void write_statistics_csv(const std::filesystem::path& file, const std::vector<macro::FieldStatistics>& stats,
                          const Provenance& p);

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Writes `text` to `file`, creating parent directories. IoError on failure.
void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace offaxis::io
