// SPDX-License-Identifier: Apache-2.0
#include "offaxis/kinematics.hpp"

#include "offaxis/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace offaxis::kinematics {

namespace {

constexpr double kOrthogonalityTol = 1e-12;
constexpr double kSymmetryTol = 1e-12;

struct SymmetricEigen {
  Eigen::Matrix3d vectors;
  Eigen::Vector3d values;
};

SymmetricEigen eigen_symmetric(const Tensor2& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(c);
  return {solver.eigenvectors(), solver.eigenvalues()};
}

}  // namespace

OffAxisAngle::OffAxisAngle(double degrees) : degrees_(degrees) {
  if (!(degrees >= 0.0 && degrees <= 90.0))
    throw DomainError("off-axis angle must lie in [0, 90] degrees, got " +
                      std::to_string(degrees));
}

double OffAxisAngle::radians() const noexcept {
  return degrees_ * std::numbers::pi / 180.0;
}

RotationMatrix RotationMatrix::from(const Tensor2& q) {
  if (!q.allFinite()) throw DomainError("rotation matrix has non-finite entries");
  const double orth = max_abs(q.transpose() * q - Tensor2::Identity());
  if (orth > kOrthogonalityTol)
    throw DomainError("matrix is not orthogonal (|Q^T Q - I| = " + std::to_string(orth) + ")");
  if (std::abs(q.determinant() - 1.0) > kOrthogonalityTol)
    throw DomainError("rotation matrix must have det = +1");
  return RotationMatrix(q);
}

StretchTensor StretchTensor::from(const Tensor2& u) {
  if (!u.allFinite()) throw DomainError("stretch tensor has non-finite entries");
  if (max_abs(u - u.transpose()) > kSymmetryTol)
    throw DomainError("stretch tensor must be symmetric");
  return StretchTensor(u);
}

StretchTensor StretchTensor::from_voigt(const Voigt6& components) {
  return StretchTensor(offaxis::from_voigt(components));
}

bool StretchTensor::is_positive_definite() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(u_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() > 0.0;
}

RotationMatrix rotation_matrix(OffAxisAngle angle) {
  return in_plane_rotation(angle.radians());
}

RotationMatrix fiber_frame(OffAxisAngle angle) {
  double c = std::cos(angle.radians());
  double s = std::sin(angle.radians());
  if (angle.degrees() == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (angle.degrees() == 90.0) {
    c = 0.0;
    s = 1.0;
  }
  Tensor2 q;
  q << s, c, 0.0,
       -c, s, 0.0,
       0.0, 0.0, 1.0;
  return RotationMatrix::trusted(q);
}

RotationMatrix in_plane_rotation(double radians) {
  // Exact zeros at the quadrant angles keep 0 and 90 degrees free of round-off.
  double c = std::cos(radians);
  double s = std::sin(radians);
  if (radians == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (radians == std::numbers::pi / 2.0) {
    c = 0.0;
    s = 1.0;
  }
  Tensor2 q;
  q << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return RotationMatrix::trusted(q);
}

Tensor2 to_local(const Tensor2& f_global, const RotationMatrix& q) {
  return q.matrix() * f_global * q.matrix().transpose();
}

Tensor2 to_global(const Tensor2& f_local, const RotationMatrix& q) {
  return q.matrix().transpose() * f_local * q.matrix();
}

Tensor2 to_global_stress(const Tensor2& sigma_local, const RotationMatrix& q) {
  const double scale = 1.0 + max_abs(sigma_local);
  if (max_abs(sigma_local - sigma_local.transpose()) > 1e-9 * scale)
    throw ContractViolation("to_global_stress expects a symmetric stress");
  return q.matrix().transpose() * sigma_local * q.matrix();
}

PolarDecomposition polar_decompose(const Tensor2& f) {
  const double det = f.determinant();
  if (!(det > 0.0))
    throw DomainError("polar decomposition requires det F > 0 (det = " + std::to_string(det) + ")");

  const SymmetricEigen eig = eigen_symmetric(f.transpose() * f);
  const Eigen::Vector3d stretches = eig.values.cwiseSqrt();
  const Eigen::Matrix3d& v = eig.vectors;

  const Tensor2 u = v * stretches.asDiagonal() * v.transpose();
  const Tensor2 u_inv = v * stretches.cwiseInverse().asDiagonal() * v.transpose();
  const Tensor2 r = f * u_inv;
  // Exact symmetrization removes the O(eps) skew part left by the product.
  return {RotationMatrix::trusted(r), StretchTensor::trusted(0.5 * (u + u.transpose()))};
}

PolarDerivative polar_derivative(const PolarDecomposition& polar, const Tensor2& df) {
  const Tensor2& r = polar.rotation.matrix();
  const Tensor2& u = polar.stretch.matrix();
  const Tensor2 f = r * u;

  const SymmetricEigen eig = eigen_symmetric(u);
  const Tensor2 dc = df.transpose() * f + f.transpose() * df;
  Tensor2 dc_eig = eig.vectors.transpose() * dc * eig.vectors;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dc_eig(i, j) /= eig.values(i) + eig.values(j);
  const Tensor2 du = eig.vectors * dc_eig * eig.vectors.transpose();

  const Tensor2 u_inv = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
  const Tensor2 dr = (df - r * du) * u_inv;
  return {dr, du};
}

Tensor2 nominal_stress(const Tensor2& sigma, const Tensor2& f) {
  const double det = f.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) throw DomainError("nominal stress needs det F > 0");
  return det * sigma * f.inverse().transpose();
}

Matrix9 nominal_stress_tangent(const Tensor2& sigma, const Tensor2& f, const Matrix9& dsigma_df) {
  const double det = f.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) throw DomainError("nominal stress needs det F > 0");
  const Tensor2 g = f.inverse();
  const Tensor2 g_t = g.transpose();
  Matrix9 out;
  for (int col = 0; col < 9; ++col) {
    const Tensor2 e = unit_tensor(col);
    const Tensor2 dsigma = unflatten(dsigma_df.col(col));
    const Tensor2 dp = det * ((g * e).trace() * sigma * g_t + dsigma * g_t - sigma * g_t * e.transpose() * g_t);
    out.col(col) = flatten(dp);
  }
  return out;
}

double reorientation_angle(const Tensor2& f_local) {
  if (f_local(0, 0) == 0.0)
    throw DomainError("reorientation angle undefined for F11 = 0");
  return std::atan(f_local(1, 0) / f_local(0, 0)) * 180.0 / std::numbers::pi;
}

}  // namespace offaxis::kinematics
