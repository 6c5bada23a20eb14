// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth generators: the equal-deformation mixture and a small periodic
// hexahedral unit cell with a single fiber along local e1.
#pragma once

#include "offaxis/constitutive.hpp"
#include "offaxis/pathgen.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cstddef>
#include <vector>

namespace offaxis::micromodel {

using constitutive::FiberProperties;
using constitutive::MaterialState;
using constitutive::MatrixProperties;
using constitutive::ModelProperties;

// ---------------------------------------------------------------------------
// Voigt mixture
// ---------------------------------------------------------------------------

struct Constituent {
  ModelProperties properties;
  double weight = 0.0;
};

struct VoigtMixture {
  std::vector<Constituent> constituents;

  /// Fiber at `fiber_fraction`, matrix at the remainder.
  static VoigtMixture composite(const FiberProperties& fiber, const MatrixProperties& matrix,
                                double fiber_fraction);
  /// Throws DomainError unless weights lie in (0, 1] and sum to 1.
  void validate() const;
};

struct MixtureState {
  std::vector<MaterialState> constituents;
  static MixtureState fresh(const VoigtMixture& mix);
};

struct MixtureResult {
  Tensor2 stress = Tensor2::Zero();
  MixtureState state;
};

MixtureResult voigt_step(const VoigtMixture& mix, const Tensor2& f_local, double dt,
                         const MixtureState& state);

/// Stress at every step of the path from a fresh state. Constituent failures
/// are rethrown as SolverError whose index is the step.
std::vector<Tensor2> voigt_evaluate(const VoigtMixture& mix, const pathgen::LoadPath& path);

// ---------------------------------------------------------------------------
// Periodic unit cell
// ---------------------------------------------------------------------------

enum class Phase : unsigned char { Matrix = 0, Fiber = 1 };

/// n x n x n hexahedra over the unit cube. The fiber is the set of cells whose
/// (y, z) index-space centers fall inside the circle around the cell center;
/// the widths of the rows and columns crossing it are stretched until the
/// realized area fraction equals the target.
struct RveMesh {
  int n = 4;
  std::array<std::vector<double>, 3> widths;  // per axis, n entries, sum 1
  std::vector<Phase> phase;                    // n^3 cells, index (i, j, k) -> i + n (j + n k)
  double target_fraction = 0.0;

  /// `offset` rolls the (y, z) pattern by whole cells.
  static RveMesh build(int n, double fiber_fraction, std::array<int, 2> offset = {0, 0});
  /// Homogeneous cell of one phase, uniform widths.
  static RveMesh homogeneous(int n, Phase phase);

  std::size_t cell_count() const { return phase.size(); }
  std::size_t cell_index(int i, int j, int k) const { return i + n * (j + n * k); }
  double fiber_fraction() const;
  double volume() const { return 1.0; }
};

struct RveMaterials {
  FiberProperties fiber;
  MatrixProperties matrix;
};

struct RveState {
  Eigen::VectorXd fluctuation;           // periodic node fluctuations, 3 per node
  std::vector<MaterialState> points;     // 8 per cell
  static RveState fresh(const RveMesh& mesh, const RveMaterials& materials);
};

struct RveSettings {
  double relative_tolerance = 1e-8;
  double absolute_tolerance = 1e-12;  // times the internal force scale
  int max_iterations = 25;
};

struct RveResult {
  Tensor2 stress = Tensor2::Zero();  // volume-averaged Cauchy stress
  RveState state;
  int iterations = 0;
  double residual = 0.0;
};

/// Equilibrium under periodic fluctuations with the average deformation
/// F_target, followed by volume averaging of the Cauchy stress over the
/// deformed cell. SolverError on divergence, DomainError on det F <= 0.
RveResult rve_solve_step(const RveMesh& mesh, const RveMaterials& materials, const Tensor2& f_target,
                         double dt, const RveState& state, const RveSettings& settings = {});

std::vector<Tensor2> rve_evaluate(const RveMesh& mesh, const RveMaterials& materials,
                                  const pathgen::LoadPath& path, const RveSettings& settings = {});

/// Volume average sum(w J sigma) / sum(w J).
Tensor2 homogenize(const std::vector<Tensor2>& stresses, const std::vector<double>& weights,
                   const std::vector<double>& jacobians);

}  // namespace offaxis::micromodel
