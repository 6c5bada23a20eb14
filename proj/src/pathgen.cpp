// SPDX-License-Identifier: Apache-2.0
#include "offaxis/pathgen.hpp"

#include "offaxis/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace offaxis::pathgen {

namespace {

// Cholesky factor of the SE covariance over steps 1..n conditioned on m(0) = 0.
Eigen::MatrixXd conditioned_factor(std::size_t n, double length_scale) {
  const auto kernel = [&](double a, double b) {
    const double d = (a - b) / length_scale;
    return std::exp(-0.5 * d * d);
  };
  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k(i, j) = kernel(i + 1.0, j + 1.0) - kernel(i + 1.0, 0.0) * kernel(j + 1.0, 0.0);

  double jitter = 1e-10;
  for (int attempt = 0; attempt < 8; ++attempt, jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw DomainError("GP covariance is not positive definite");
}

bool symmetric_positive_definite(const Tensor2& u) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(u, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void PathSpec::validate() const {
  if (!(amplitude_cap >= 0.0) || !std::isfinite(amplitude_cap))
    throw DomainError("amplitude cap must be finite and non-negative");
  if (amplitude_cap >= 1.0 / 3.0)
    throw DomainError("amplitude cap must stay below 1/3 to keep U positive definite");
  if (!(length_scale_fraction > 0.0)) throw DomainError("GP length scale must be positive");
  if (time_step.kind == TimeStepRule::Kind::Fixed) {
    if (!(time_step.value > 0.0)) throw DomainError("time increment must be positive");
  } else if (!(time_step.lower > 0.0) || !(time_step.upper >= time_step.lower)) {
    throw DomainError("log-uniform time increment bounds must satisfy 0 < lower <= upper");
  }
}

LoadPath sample_path(const PathSpec& spec, std::size_t index) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const std::size_t n = spec.steps;
  const Eigen::MatrixXd factor =
      n > 0 ? conditioned_factor(n, std::max(1.0, spec.length_scale_fraction * n)) : Eigen::MatrixXd();

  for (std::size_t attempt = 0; attempt <= spec.max_retries; ++attempt) {
    Voigt6 direction;
    for (int k = 0; k < 6; ++k) direction(k) = normal(rng);
    direction /= direction.norm();
    const Tensor2 d = from_voigt(direction);

    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = normal(rng);
    Eigen::VectorXd m = n > 0 ? Eigen::VectorXd(factor * z) : Eigen::VectorXd();

    // Rescale so the largest excursion lands at a random fraction of the cap.
    const double peak = n > 0 ? m.cwiseAbs().maxCoeff() * max_abs(d) : 0.0;
    const double level = (0.3 + 0.7 * uniform(rng)) * spec.amplitude_cap;
    if (peak > 0.0) m *= level / peak;

    double dt = spec.time_step.value;
    if (spec.time_step.kind == TimeStepRule::Kind::LogUniform) {
      const double lo = std::log(spec.time_step.lower), hi = std::log(spec.time_step.upper);
      dt = std::exp(lo + (hi - lo) * uniform(rng));
    }

    LoadPath path;
    path.steps.reserve(n + 1);
    path.steps.push_back({Tensor2::Identity(), dt});
    bool valid = true;
    for (std::size_t i = 0; i < n && valid; ++i) {
      const Tensor2 u = Tensor2::Identity() + m(i) * d;
      valid = max_abs(u - Tensor2::Identity()) <= spec.amplitude_cap * (1.0 + 1e-12) &&
              symmetric_positive_definite(u);
      path.steps.push_back({u, dt});
    }
    if (valid) return path;
  }
  throw DomainError("path " + std::to_string(index) + " violated the amplitude cap after " +
                    std::to_string(spec.max_retries) + " retries");
}

std::vector<LoadPath> sample_paths(const PathSpec& spec) {
  std::vector<LoadPath> paths;
  paths.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) paths.push_back(sample_path(spec, i));
  return paths;
}

double CreepProtocol::next_stress(double previous, double dt) const {
  if (std::isinf(rate)) return target;
  return std::min(previous + rate * dt, target);
}

double CreepProtocol::ramp_duration() const {
  return std::isinf(rate) ? 0.0 : target / rate;
}

CreepProtocol creep_path(double target, double rate, double hold) {
  if (!std::isfinite(target)) throw DomainError("creep target must be finite");
  if (!(rate > 0.0)) throw DomainError("creep stress rate must be positive");
  if (!(hold > 0.0)) throw DomainError("creep hold time must be positive");
  return {target, rate, hold};
}

}  // namespace offaxis::pathgen
