// SPDX-License-Identifier: Apache-2.0
//
// Coupon-scale finite elements: linear wedges with one integration point,
// the homogenized law at every point, displacement or force controlled grips.
#pragma once

#include "offaxis/evaluator.hpp"
#include "offaxis/macro_mesh.hpp"
#include "offaxis/protocol.hpp"
#include "offaxis/stepping.hpp"

#include <string>
#include <vector>

namespace offaxis::macro {

using protocol::CreepLoading;
using protocol::CsrLoading;
using protocol::Loading;

struct SolverSettings {
  double residual_rtol = 2e-10;  // on the free residual, relative to the grip reactions
  double residual_atol = 1e-9;   // N
  double hourglass = 1e-3;       // stabilization stiffness as a fraction of the shear modulus; 0 disables
  bool fiber_rotation = true;
  std::size_t threads = 1;
  bool keep_fields = true;       // false keeps only the global curve
};

struct MacroProblem {
  CouponSpec coupon;
  Loading loading;
  bool lateral_free = false;  // grips hold y only, transverse translation free
  stepping::AdaptiveStepping stepping;
  SolverSettings solver;
};

struct ElementField {
  Tensor2 f = Tensor2::Identity();
  Tensor2 sigma = Tensor2::Zero();  // Cauchy
  Tensor2 p = Tensor2::Zero();      // nominal
  double phi_deg = 0.0;
};

struct FieldFrame {
  double time = 0.0;
  double dt = 0.0;
  double eps_yy = 0.0;         // top displacement / L0
  double sig_yy = 0.0;         // top reaction y / A0
  double sig_xy = 0.0;         // top reaction x / A0
  double applied = 0.0;        // prescribed strain (CSR) or stress (creep)
  double reaction_imbalance = 0.0;  // |sum top + sum bottom| / |top reactions|
  double work_increment = 0.0;      // external work of the grips over the step, N mm
  std::size_t iterations = 0;       // residual assemblies
  std::vector<ElementField> elements;  // empty when fields are not kept

  std::vector<double> eps_yy_field() const;
  std::vector<double> phi_field() const;
};

struct MacroResult {
  std::vector<FieldFrame> frames;  // first frame is the undeformed state
  bool completed = true;
  std::string message;
  std::size_t cuts = 0;
};

MacroResult run(const MacroMesh& mesh, const MacroProblem& problem, const evaluator::LocalLaw& law);
MacroResult run(const MacroProblem& problem, const evaluator::LocalLaw& law);

struct FieldStatistics {
  double time = 0.0;
  double eps_yy = 0.0;  // global
  double phi_mean = 0.0, phi_min = 0.0, phi_max = 0.0;
  double eps_mean = 0.0, eps_min = 0.0, eps_max = 0.0;
  double eps_cov = 0.0;
};

/// One row per frame that carries element fields.
std::vector<FieldStatistics> field_statistics(const MacroResult& result);

enum class Alignment { Strain, Time };

/// Statistics linearly interpolated to a global strain or a time stamp.
/// DomainError when the value lies outside the recorded series.
FieldStatistics statistics_at(const MacroResult& result, Alignment alignment, double value);

/// Tab line angle from the load axis that cancels the shear coupling of the
/// global compliance (Voigt order xx, yy, zz, xy, yz, zx). Degrees in (0, 180).
double oblique_angle(const Matrix6& compliance);
double oblique_angle_for(const evaluator::LocalLaw& law, kinematics::OffAxisAngle angle, double dt = 1.0);

}  // namespace offaxis::macro
