// SPDX-License-Identifier: Apache-2.0
//
// One macroscopic material point under uniaxial engineering stress. The
// loaded edge keeps its orientation (F_yX = F_zX = F_zY = 0), every other
// nominal stress component that can do work vanishes.
#pragma once

#include "offaxis/evaluator.hpp"
#include "offaxis/protocol.hpp"
#include "offaxis/stepping.hpp"

#include <string>
#include <variant>
#include <vector>

namespace offaxis::singlescale {

using protocol::CreepLoading;
using protocol::CsrLoading;
using protocol::Loading;

struct NewtonSettings {
  double tolerance = 1e-9;      // MPa on every free nominal stress component
  double relative_step = 1e-7;  // finite-difference Jacobian
};

struct SinglePointProblem {
  kinematics::OffAxisAngle angle{90.0};
  Loading loading;
  bool fiber_rotation = true;
  NewtonSettings newton;
  stepping::AdaptiveStepping stepping;
};

struct CurvePoint {
  double time = 0.0;
  double dt = 0.0;       // increment that produced this point
  double eps_yy = 0.0;   // F_yy - 1
  double sig_yy = 0.0;   // P_yY, MPa
  double sig_xy = 0.0;   // P_xY, MPa
  double phi_deg = 0.0;
  Tensor2 f = Tensor2::Identity();
  Tensor2 p = Tensor2::Zero();
  double applied = 0.0;  // prescribed P_yY (creep) or F_yy - 1 (CSR)
  std::size_t iterations = 0;
};

struct Curve {
  std::vector<CurvePoint> points;   // starts with the undeformed state at t = 0
  bool completed = true;
  std::string message;
  std::size_t cuts = 0;
};

/// Prescribed F_yy = 1 + rate t. ConfigError on a creep loading.
Curve solve_csr(const SinglePointProblem& problem, const evaluator::LocalLaw& law);
/// Prescribed P_yY following the creep ramp/hold. ConfigError on a CSR loading.
Curve solve_creep(const SinglePointProblem& problem, const evaluator::LocalLaw& law);
Curve solve(const SinglePointProblem& problem, const evaluator::LocalLaw& law);

}  // namespace offaxis::singlescale
