// SPDX-License-Identifier: Apache-2.0
//
// Stress/stretch snapshot datasets and their binary container.
//
// File layout (little-endian):
//   char[8]  magic "OXDSET01"
//   u32      format version
//   u32      generator level (0 mixture, 1 unit cell)
//   u64      seed
//   u64      requested path count
//   u64      skipped path count
//   u64      sample count
//   char[64] properties hash (hex SHA-256)
//   per sample: u64 step count, then per step: f64 dt, f64[6] U, f64[6] sigma
// U and sigma use the Voigt order xx, yy, zz, xy, yz, zx with tensor shear.
#pragma once

#include "offaxis/micromodel.hpp"
#include "offaxis/pathgen.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace offaxis::dataset {

struct Sample {
  pathgen::LoadPath path;
  std::vector<Voigt6> stress;  // MPa, one per path step
};

struct Metadata {
  std::uint32_t generator_level = 0;
  std::uint64_t seed = 0;
  std::uint64_t requested = 0;
  std::uint64_t skipped = 0;
  std::string properties_hash;
};

struct SnapshotDataset {
  Metadata metadata;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

struct RveGenerator {
  micromodel::RveMesh mesh;
  micromodel::RveMaterials materials;
  micromodel::RveSettings settings;
};

using Generator = std::variant<micromodel::VoigtMixture, RveGenerator>;

/// Evaluates every path from a fresh state. Failing paths are skipped and
/// counted. Throws DomainError for an empty path list.
SnapshotDataset generate_dataset(const Generator& generator, const std::vector<pathgen::LoadPath>& paths,
                                 std::uint64_t seed, const std::string& properties_hash);

/// Stress sequence of one path under the generator.
std::vector<Tensor2> evaluate_path(const Generator& generator, const pathgen::LoadPath& path);

void write_dataset(const std::filesystem::path& file, const SnapshotDataset& data);
/// Throws IoError on unreadable, truncated or foreign files.
SnapshotDataset read_dataset(const std::filesystem::path& file);

/// Splits off the last `fraction` of the samples (rounded, at least one when
/// fraction > 0 and the dataset has two or more samples).
std::pair<SnapshotDataset, SnapshotDataset> split(const SnapshotDataset& data, double fraction);

}  // namespace offaxis::dataset
