// SPDX-License-Identifier: Apache-2.0
//
// Material-point models embedded in both the micromodel and the PRNN material
// layer. Updates are pure: state in, state out.
#pragma once

#include "offaxis/tensor.hpp"

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace offaxis::constitutive {

/// Transversely isotropic hyperelastic fiber, axis fixed to local e1.
///
///   psi = mu/2 (I1 - 3) - mu ln J + lambda/2 (ln J)^2
///       + [alpha + beta ln J + gamma (I4 - 1)] (I4 - 1) - alpha/2 (I5 - 1)
///
/// with I4 = a.C a and I5 = a.C^2 a. Small-strain shear modulus in the 1-2 and
/// 1-3 planes is mu - alpha; in the transverse 2-3 plane it is mu.
struct FiberProperties {
  double mu = 0.0;       // MPa
  double lambda = 0.0;   // MPa
  double alpha = 0.0;    // MPa
  double beta = 0.0;     // MPa
  double gamma = 0.0;    // MPa

  double shear_modulus_12() const { return mu - alpha; }
  /// Returns a copy whose 1-2 shear modulus is `g12` (alpha adjusted).
  FiberProperties with_shear_modulus_12(double g12) const;
  /// Analytic small-strain stiffness (Voigt, engineering shear).
  Matrix6 small_strain_stiffness() const;
  void validate() const;

  bool operator==(const FiberProperties&) const = default;
};

/// One Maxwell element of the driving stress.
struct MaxwellMode {
  double shear_modulus = 0.0;  // MPa
  double viscosity = 0.0;      // zero-stress viscosity, MPa s (may be +inf)
  std::size_t process = 0;

  bool operator==(const MaxwellMode&) const = default;
};

/// Multi-mode elasto-viscoplastic glassy polymer.
///
/// sigma = kappa (J - 1) I + (G_r / J) dev(B~) + sum_j (G_j / J) dev(B~e_j)
///
/// Each mode relaxes with the Eyring viscosity
/// eta_j = eta0_j (tau/tau0_p) / sinh(tau/tau0_p), where tau is the von Mises
/// equivalent of the summed driving stress of the mode's process p.
///
/// `modes` is kept in calibration order: interleaved by process, then by index
/// within the process (p0m0, p1m0, p0m1, p1m1, ...).
struct MatrixProperties {
  double bulk_modulus = 0.0;                // MPa
  double hardening_modulus = 0.0;           // MPa
  std::vector<double> activation_stress;    // MPa, one per process
  std::vector<MaxwellMode> modes;

  std::size_t process_count() const { return activation_stress.size(); }
  std::size_t mode_count() const { return modes.size(); }
  double instantaneous_shear_modulus() const;
  Matrix6 small_strain_stiffness() const;
  void validate() const;

  /// Builds calibration order from per-process mode lists.
  static MatrixProperties from_processes(double bulk_modulus, double hardening_modulus,
                                         const std::vector<double>& activation_stress,
                                         const std::vector<std::vector<MaxwellMode>>& per_process);

  bool operator==(const MatrixProperties&) const = default;
};

using ModelProperties = std::variant<FiberProperties, MatrixProperties>;

/// History of one material point. Fiber points carry an empty state.
struct MaterialState {
  Tensor2 deformation = Tensor2::Identity();   // F at the last converged step
  std::vector<Voigt6> elastic_finger;          // isochoric B_e per mode
  std::vector<double> plastic_strain;          // per process

  static MaterialState fresh(const MatrixProperties& props);
  static MaterialState empty() { return {}; }

  bool is_empty() const { return elastic_finger.empty() && plastic_strain.empty(); }
  /// Values that influence later stresses: F (9) followed by every B_e (6 each).
  std::vector<double> pack_history() const;
  void unpack_history(const std::vector<double>& values);
  std::size_t history_size() const { return 9 + 6 * elastic_finger.size(); }

  bool operator==(const MaterialState&) const = default;
};

struct MaterialPointResult {
  Tensor2 stress = Tensor2::Zero();   // Cauchy, MPa
  MaterialState state;
  std::optional<Matrix6> tangent;     // Voigt, MPa; filled on request
};

MaterialPointResult fiber_update(const Tensor2& f_local, const FiberProperties& props);

/// Throws ContractViolation on a state/mode-count mismatch, DomainError on
/// det F <= 0 or dt <= 0, SolverError (index = mode) on corrector failure.
MaterialPointResult matrix_update(const Tensor2& f_local, double dt, const MaterialState& state,
                                  const MatrixProperties& props);

/// Dispatches on the model type.
MaterialPointResult update(const ModelProperties& props, const Tensor2& f_local, double dt,
                           const MaterialState& state);

/// Central differences of Cauchy stress w.r.t. the six stretch components
/// (engineering shear), step 1e-7 (1 + |F|inf); history held at step entry.
Matrix6 consistent_tangent(const ModelProperties& props, const Tensor2& f_local, double dt,
                           const MaterialState& state, double relative_step = 1e-7);

/// Central differences of Cauchy stress w.r.t. all nine F components.
Matrix9 stress_gradient(const ModelProperties& props, const Tensor2& f_local, double dt,
                        const MaterialState& state, double relative_step = 1e-7);

/// Keeps the first n modes in calibration order.
MatrixProperties mode_subset(const MatrixProperties& props, std::size_t n);

MaterialState fresh_state(const ModelProperties& props);

}  // namespace offaxis::constitutive
