// SPDX-License-Identifier: Apache-2.0
//
// Study drivers. Each study fans its runs out over a small worker pool; every
// run writes into its own directory under <out>/runs and the summary table
// names that directory in its last column.
#pragma once

#include "offaxis/config.hpp"
#include "offaxis/export.hpp"
#include "offaxis/prnn_train.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace offaxis::studies {

enum class StudyKind { ModeSweep, TransferGrid, EndtabCompare, BcCompare, ModelSelection };

/// "mode-sweep", "transfer-grid", ... ConfigError for anything else.
StudyKind parse_kind(const std::string& name);
std::string kind_name(StudyKind kind);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct StudyContext {
  std::filesystem::path out;
  io::Provenance provenance;
  std::size_t workers = 1;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. The first
/// exception in index order is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

// Computational cores, usable without a config.

struct ModeError {
  std::size_t modes = 0;
  prnn::ErrorMetrics error;
};

/// Network errors on `data` after transferring to (fiber, matrix) with
/// n = 1..matrix.mode_count() modes. No training happens here.
std::vector<ModeError> mode_sweep(const prnn::PrnnParams& params, const prnn::PrnnLayout& layout,
                                  const constitutive::FiberProperties& fiber,
                                  const constitutive::MatrixProperties& matrix,
                                  const dataset::SnapshotDataset& data);

/// Stress sequences of the network itself along the paths of `reference`
/// (or `paths`), packaged as a dataset.
dataset::SnapshotDataset network_dataset(const prnn::PrnnParams& params, const prnn::PrnnLayout& layout,
                                         const std::vector<pathgen::LoadPath>& paths, std::uint64_t seed);

struct CouponSummary {
  double peak_shear = 0.0;       // max |sig_xy| over the run, MPa
  double final_strain = 0.0;
  double final_stress = 0.0;     // sig_yy at the last frame, MPa
  double final_cov = 0.0;        // CoV of eps_yy at the last frame (0 without fields)
  bool completed = true;
};

CouponSummary summarize(const macro::MacroResult& result);

/// Reads [study] from the config, runs it, writes <out>/table.csv and returns
/// the table. ConfigError when a stochastic study is given no seed.
Table run_study(const config::Config& c, const StudyContext& ctx);

}  // namespace offaxis::studies
