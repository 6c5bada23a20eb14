// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "offaxis/constitutive.hpp"
#include "offaxis/tensor.hpp"

#include <cmath>
#include <random>

namespace offaxis::testkit {

/// Random deformation gradient I + perturbation, redrawn until det lies in (lo, hi).
inline Tensor2 random_deformation(std::mt19937_64& rng, double spread = 0.3, double lo = 0.2,
                                  double hi = 5.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (;;) {
    Tensor2 f = Tensor2::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f(i, j) += u(rng);
    const double det = f.determinant();
    if (det > lo && det < hi) return f;
  }
}

inline Tensor2 random_symmetric(std::mt19937_64& rng, double scale = 100.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor2 s;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) s(i, j) = s(j, i) = u(rng);
  return s;
}

inline Tensor2 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Small synthetic calibration shared by the unit tests.
inline constitutive::FiberProperties test_fiber() {
  constitutive::FiberProperties p;
  p.mu = 5769.0;
  p.lambda = 4000.0;
  p.alpha = 5769.0 - 45.0;
  p.beta = 0.0;
  p.gamma = 29670.0;
  return p;
}

inline constitutive::MatrixProperties test_matrix(std::size_t modes_per_process = 2,
                                                  std::size_t processes = 2) {
  std::vector<std::vector<constitutive::MaxwellMode>> per_process(processes);
  std::vector<double> tau0(processes);
  for (std::size_t p = 0; p < processes; ++p) {
    tau0[p] = 5.0 + 2.0 * static_cast<double>(p);
    for (std::size_t m = 0; m < modes_per_process; ++m) {
      const double g = 400.0 / std::pow(2.0, static_cast<double>(m)) / (1.0 + static_cast<double>(p));
      const double tau_relax = 1e4 / std::pow(10.0, static_cast<double>(m) + 2.0 * static_cast<double>(p));
      per_process[p].push_back({g, g * tau_relax, p});
    }
  }
  return constitutive::MatrixProperties::from_processes(4000.0, 26.0, tau0, per_process);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace offaxis::testkit
