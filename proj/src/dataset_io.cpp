// SPDX-License-Identifier: Apache-2.0
#include "offaxis/dataset.hpp"

#include "offaxis/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace offaxis::dataset {

static_assert(std::endian::native == std::endian::little, "dataset files assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'O', 'X', 'D', 'S', 'E', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxSteps = 1u << 24;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("dataset file is truncated");
  return value;
}

}  // namespace

std::vector<Tensor2> evaluate_path(const Generator& generator, const pathgen::LoadPath& path) {
  if (const auto* mix = std::get_if<micromodel::VoigtMixture>(&generator))
    return micromodel::voigt_evaluate(*mix, path);
  const auto& rve = std::get<RveGenerator>(generator);
  return micromodel::rve_evaluate(rve.mesh, rve.materials, path, rve.settings);
}

SnapshotDataset generate_dataset(const Generator& generator, const std::vector<pathgen::LoadPath>& paths,
                                 std::uint64_t seed, const std::string& properties_hash) {
  if (paths.empty()) throw DomainError("dataset generation needs at least one path");
  SnapshotDataset data;
  data.metadata.generator_level = std::holds_alternative<RveGenerator>(generator) ? 1 : 0;
  data.metadata.seed = seed;
  data.metadata.requested = paths.size();
  data.metadata.properties_hash = properties_hash;
  for (const auto& path : paths) {
    try {
      const auto stresses = evaluate_path(generator, path);
      Sample s;
      s.path = path;
      s.stress.reserve(stresses.size());
      for (const auto& t : stresses) s.stress.push_back(to_voigt(t));
      data.samples.push_back(std::move(s));
    } catch (const SolverError&) {
      ++data.metadata.skipped;
    } catch (const DomainError&) {
      ++data.metadata.skipped;
    }
  }
  return data;
}

void write_dataset(const std::filesystem::path& file, const SnapshotDataset& data) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, data.metadata.generator_level);
  put(out, data.metadata.seed);
  put(out, data.metadata.requested);
  put(out, data.metadata.skipped);
  put(out, static_cast<std::uint64_t>(data.samples.size()));
  char hash[64] = {};
  std::memcpy(hash, data.metadata.properties_hash.data(), std::min<std::size_t>(64, data.metadata.properties_hash.size()));
  out.write(hash, sizeof hash);
  for (const auto& s : data.samples) {
    if (s.stress.size() != s.path.size())
      throw ContractViolation("sample path and stress sequences differ in length");
    put(out, static_cast<std::uint64_t>(s.path.size()));
    for (std::size_t i = 0; i < s.path.size(); ++i) {
      put(out, s.path.steps[i].dt);
      const Voigt6 u = to_voigt(s.path.steps[i].stretch);
      for (int k = 0; k < 6; ++k) put(out, u(k));
      for (int k = 0; k < 6; ++k) put(out, s.stress[i](k));
    }
  }
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

SnapshotDataset read_dataset(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + file.string() + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError("'" + file.string() + "' is not a dataset file");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported dataset version " + std::to_string(version));

  SnapshotDataset data;
  data.metadata.generator_level = get<std::uint32_t>(in);
  data.metadata.seed = get<std::uint64_t>(in);
  data.metadata.requested = get<std::uint64_t>(in);
  data.metadata.skipped = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  char hash[64];
  in.read(hash, sizeof hash);
  if (!in) throw IoError("dataset file is truncated");
  data.metadata.properties_hash.assign(hash, strnlen(hash, sizeof hash));

  for (std::uint64_t s = 0; s < count; ++s) {
    const auto steps = get<std::uint64_t>(in);
    if (steps > kMaxSteps) throw IoError("implausible step count in dataset");
    Sample sample;
    sample.path.steps.resize(steps);
    sample.stress.resize(steps);
    for (std::uint64_t i = 0; i < steps; ++i) {
      sample.path.steps[i].dt = get<double>(in);
      Voigt6 u;
      for (int k = 0; k < 6; ++k) u(k) = get<double>(in);
      sample.path.steps[i].stretch = from_voigt(u);
      for (int k = 0; k < 6; ++k) sample.stress[i](k) = get<double>(in);
    }
    data.samples.push_back(std::move(sample));
  }
  return data;
}

std::pair<SnapshotDataset, SnapshotDataset> split(const SnapshotDataset& data, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw DomainError("split fraction must lie in [0, 1)");
  std::size_t tail = static_cast<std::size_t>(std::lround(fraction * data.size()));
  if (fraction > 0.0 && data.size() >= 2) tail = std::clamp<std::size_t>(tail, 1, data.size() - 1);
  SnapshotDataset head_part{data.metadata, {}}, tail_part{data.metadata, {}};
  const std::size_t cut = data.size() - tail;
  head_part.samples.assign(data.samples.begin(), data.samples.begin() + cut);
  tail_part.samples.assign(data.samples.begin() + cut, data.samples.end());
  return {head_part, tail_part};
}

}  // namespace offaxis::dataset
