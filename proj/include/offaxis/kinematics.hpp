// SPDX-License-Identifier: Apache-2.0
//
// Finite-strain kinematics for off-axis loading: the global (coupon) frame has
// the load along y, the local frame has the fiber along e1. Angles cross the
// API in degrees and are converted to radians internally.
#pragma once

#include "offaxis/tensor.hpp"

namespace offaxis::kinematics {

/// Angle between the global y axis and the fiber direction, in [0, 90] degrees.
class OffAxisAngle {
 public:
  explicit OffAxisAngle(double degrees);

  double degrees() const noexcept { return degrees_; }
  double radians() const noexcept;

 private:
  double degrees_;
};

/// Proper orthogonal 3x3 matrix (Q^T Q = I, det Q = +1 within 1e-12).
class RotationMatrix {
 public:
  RotationMatrix() : q_(Tensor2::Identity()) {}

  /// Validates orthogonality and orientation; throws DomainError otherwise.
  static RotationMatrix from(const Tensor2& q);
  /// Skips validation. For matrices built by closed-form or decomposition code
  /// that guarantees the invariant.
  static RotationMatrix trusted(const Tensor2& q) { return RotationMatrix(q); }

  const Tensor2& matrix() const noexcept { return q_; }
  RotationMatrix transposed() const { return RotationMatrix(q_.transpose()); }

 private:
  explicit RotationMatrix(const Tensor2& q) : q_(q) {}
  Tensor2 q_;
};

/// Symmetric stretch tensor (symmetric within 1e-12).
class StretchTensor {
 public:
  StretchTensor() : u_(Tensor2::Identity()) {}

  static StretchTensor from(const Tensor2& u);
  static StretchTensor trusted(const Tensor2& u) { return StretchTensor(u); }
  static StretchTensor from_voigt(const Voigt6& components);

  const Tensor2& matrix() const noexcept { return u_; }
  Voigt6 voigt() const { return to_voigt(u_); }
  bool is_positive_definite() const;

 private:
  explicit StretchTensor(const Tensor2& u) : u_(u) {}
  Tensor2 u_;
};

struct PolarDecomposition {
  RotationMatrix rotation;
  StretchTensor stretch;
};

/// Directional derivative of the polar factors along dF.
struct PolarDerivative {
  Tensor2 rotation;
  Tensor2 stretch;
};

RotationMatrix rotation_matrix(OffAxisAngle angle);

/// Global -> fiber frame for a fiber at `angle` from the y axis: the fiber
/// direction (sin, cos, 0) maps to e1. Equals rotation_matrix at angle - 90.
RotationMatrix fiber_frame(OffAxisAngle angle);

/// In-plane rotation about e3 by `radians`, same sign convention as rotation_matrix.
RotationMatrix in_plane_rotation(double radians);

/// Global -> local frame: Q F Q^T.
Tensor2 to_local(const Tensor2& f_global, const RotationMatrix& q);

/// Local -> global frame for deformation-like tensors: Q^T F Q.
Tensor2 to_global(const Tensor2& f_local, const RotationMatrix& q);

/// Local -> global frame for a symmetric stress: Q^T sigma Q.
/// Throws ContractViolation when the input is asymmetric beyond 1e-9 (relative).
Tensor2 to_global_stress(const Tensor2& sigma_local, const RotationMatrix& q);

/// F = R U via the eigen-decomposition of C = F^T F. Throws DomainError for det F <= 0.
PolarDecomposition polar_decompose(const Tensor2& f);

/// Derivatives of R and U of a known decomposition of F along the direction dF.
/// U dU + dU U = dC is solved in the eigenbasis of U; dR = (dF - R dU) U^-1.
PolarDerivative polar_derivative(const PolarDecomposition& polar, const Tensor2& df);

/// First Piola-Kirchhoff (nominal) stress P = det(F) sigma F^-T.
Tensor2 nominal_stress(const Tensor2& sigma, const Tensor2& f);

/// dP/dF from sigma, F and dsigma/dF (row-major 9x9 layout of tensor.hpp).
Matrix9 nominal_stress_tangent(const Tensor2& sigma, const Tensor2& f, const Matrix9& dsigma_df);

/// Fiber reorientation angle arctan(F21 / F11) of a local-frame deformation
/// gradient, in degrees. Throws DomainError when F11 == 0.
double reorientation_angle(const Tensor2& f_local);

}  // namespace offaxis::kinematics
