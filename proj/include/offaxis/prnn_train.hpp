// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/dataset.hpp"
#include "offaxis/prnn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace offaxis::prnn {

/// Per-component standard deviation of the dataset stresses (0 replaced by 1).
Voigt6 stress_scale(const dataset::SnapshotDataset& data);

/// Mean squared error over all samples, steps and components, each component
/// divided by its scale.
double loss(const PrnnParams& params, const PrnnLayout& layout, const dataset::SnapshotDataset& data,
            const Voigt6& scale);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as PrnnParams::values
};

/// Backpropagation through time; each material-point update is differentiated
/// by central differences w.r.t. its fictitious stretch and incoming history.
LossGradient loss_gradient(const PrnnParams& params, const PrnnLayout& layout,
                           const dataset::SnapshotDataset& data, const Voigt6& scale,
                           const std::vector<std::size_t>& samples = {}, double relative_step = 1e-7);

struct TrainSpec {
  std::size_t epochs = 2000;
  double learning_rate = 1e-2;
  std::size_t patience = 200;
  double validation_fraction = 0.2;
  std::size_t batch_size = 0;  // curves per update; 0 uses the whole training set
  std::uint64_t seed = 0;
  std::optional<double> target_loss;  // stop once the selection loss reaches it
  double relative_step = 1e-7;
};

struct TrainReport {
  std::vector<double> train_loss;       // per epoch, entry 0 is the initialization
  std::vector<double> validation_loss;  // same indexing; empty without validation curves
  std::size_t best_epoch = 0;
  double best_loss = 0.0;               // selection loss of `params`
  PrnnParams params;
  PrnnParams initial_params;
  std::size_t rejected_steps = 0;
  std::string stop_reason;
};

/// Adam on the normalized loss, keeping the parameters with the best
/// validation loss. Updates that make a fictitious stretch inadmissible are
/// reverted and the step is halved. SolverError on a non-finite loss.
TrainReport train(const dataset::SnapshotDataset& data, const PrnnLayout& layout, const TrainSpec& spec);

/// Starts from explicit parameters instead of a random initialization.
TrainReport train_from(const dataset::SnapshotDataset& data, const PrnnLayout& layout, const TrainSpec& spec,
                       PrnnParams initial);

struct RestartEnvelope {
  std::vector<TrainReport> runs;
  double min_loss = 0.0;
  double max_loss = 0.0;
};

/// `restarts` independent initializations, seeds spec.seed + r.
RestartEnvelope train_restarts(const dataset::SnapshotDataset& data, const PrnnLayout& layout,
                               const TrainSpec& spec, std::size_t restarts);

struct ErrorMetrics {
  double mae = 0.0;          // MPa, over all components and steps
  double relative = 0.0;     // mae as a percentage of the mean component standard deviation
  std::size_t failed = 0;    // curves whose evaluation raised
};

ErrorMetrics evaluate_errors(const PrnnParams& params, const PrnnLayout& layout,
                             const dataset::SnapshotDataset& data);

/// Network stress sequence along one path from a fresh state.
std::vector<Tensor2> evaluate_path(const PrnnParams& params, const PrnnLayout& layout,
                                   const pathgen::LoadPath& path);

}  // namespace offaxis::prnn
