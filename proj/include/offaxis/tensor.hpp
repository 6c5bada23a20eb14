// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <utility>

namespace offaxis {

/// 3x3 second-order tensor. Role (F, sigma, ...) is carried by the variable name.
using Tensor2 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

/// Symmetric tensor in Voigt order (xx, yy, zz, xy, yz, zx). Stresses store the
/// tensor components; strain-like perturbations use engineering shear.
using Voigt6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Derivative of a 3x3 tensor w.r.t. another 3x3 tensor, both flattened row-major:
/// D(3*i + j, 3*k + l) = d A_ij / d B_kl.
using Matrix9 = Eigen::Matrix<double, 9, 9>;
using Vector9 = Eigen::Matrix<double, 9, 1>;

inline constexpr std::array<std::pair<int, int>, 6> kVoigtPairs{
    {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {2, 0}}};

inline Voigt6 to_voigt(const Tensor2& t) {
  Voigt6 v;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kVoigtPairs[k];
    v(k) = t(i, j);
  }
  return v;
}

inline Tensor2 from_voigt(const Voigt6& v) {
  Tensor2 t;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kVoigtPairs[k];
    t(i, j) = v(k);
    t(j, i) = v(k);
  }
  return t;
}

/// Symmetric unit direction for Voigt slot k; shear slots carry 1/2 on each
/// off-diagonal entry so that the slot is an engineering shear strain.
inline Tensor2 voigt_direction(int k) {
  Tensor2 e = Tensor2::Zero();
  const auto [i, j] = kVoigtPairs[k];
  if (i == j) {
    e(i, i) = 1.0;
  } else {
    e(i, j) = 0.5;
    e(j, i) = 0.5;
  }
  return e;
}

inline Vector9 flatten(const Tensor2& t) {
  Vector9 v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(3 * i + j) = t(i, j);
  return v;
}

inline Tensor2 unflatten(const Vector9& v) {
  Tensor2 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = v(3 * i + j);
  return t;
}

inline Tensor2 unit_tensor(int index) {
  Tensor2 e = Tensor2::Zero();
  e(index / 3, index % 3) = 1.0;
  return e;
}

inline Tensor2 deviator(const Tensor2& t) {
  return t - (t.trace() / 3.0) * Tensor2::Identity();
}

inline double max_abs(const Tensor2& t) { return t.cwiseAbs().maxCoeff(); }

}  // namespace offaxis
