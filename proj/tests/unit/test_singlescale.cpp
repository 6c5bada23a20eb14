// SPDX-License-Identifier: Apache-2.0
#include "offaxis/errors.hpp"
#include "offaxis/singlescale.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace offaxis;
using namespace offaxis::singlescale;

namespace {

evaluator::MixtureLaw composite_law(double vf = 0.5) {
  return evaluator::MixtureLaw(
      micromodel::VoigtMixture::composite(testkit::test_fiber(), testkit::test_matrix(), vf));
}

SinglePointProblem csr_problem(double theta, double rate, double target, double dt) {
  SinglePointProblem p;
  p.angle = kinematics::OffAxisAngle(theta);
  p.loading = CsrLoading{rate, target};
  p.stepping.dt0 = dt;
  p.stepping.dt_max = dt;
  return p;
}

double max_free_nominal(const CurvePoint& q) {
  // Reactions: P_yY (load), P_yX, P_zX, P_zY (orientation of the loaded edge).
  Tensor2 free = q.p;
  free(1, 1) = free(1, 0) = free(2, 0) = free(2, 1) = 0.0;
  return max_abs(free);
}

}  // namespace

TEST(Csr, SmallStrainModulusMatchesInvertedTangent) {
  const auto law = composite_law();
  for (double theta : {0.0, 90.0}) {
    const double dt = 1.0;
    auto p = csr_problem(theta, 1e-6, 1e-6, dt);
    const auto curve = solve_csr(p, law);
    ASSERT_TRUE(curve.completed) << curve.message;
    ASSERT_EQ(curve.points.size(), 2u);
    const Matrix6 c = evaluator::initial_global_stiffness(law, kinematics::OffAxisAngle(theta), dt);
    const double modulus = 1.0 / c.inverse()(1, 1);
    const auto& q = curve.points.back();
    EXPECT_LT(testkit::relative_error(q.sig_yy / q.eps_yy, modulus), 1e-3) << theta;
  }
}

TEST(Csr, AxialStifferThanTransverse) {
  const auto law = composite_law();
  const auto axial = solve_csr(csr_problem(0.0, 1e-4, 0.005, 5.0), law);
  const auto transverse = solve_csr(csr_problem(90.0, 1e-4, 0.005, 5.0), law);
  EXPECT_GT(axial.points.back().sig_yy, 5.0 * transverse.points.back().sig_yy);
}

TEST(Csr, ZeroRateGivesZeroStress) {
  auto p = csr_problem(30.0, 0.0, 0.0, 2.0);
  std::get<CsrLoading>(p.loading).duration = 20.0;
  const auto curve = solve_csr(p, composite_law());
  ASSERT_EQ(curve.points.size(), 11u);
  for (const auto& q : curve.points) {
    EXPECT_EQ(q.sig_yy, 0.0);
    EXPECT_EQ(q.eps_yy, 0.0);
    EXPECT_EQ(q.iterations, 0u);
  }
}

TEST(Csr, UniaxialityAtEveryStep) {
  const auto law = composite_law();
  for (double theta : {15.0, 45.0}) {
    for (bool rotation : {true, false}) {
      auto p = csr_problem(theta, 1e-4, 0.02, 5.0);
      p.fiber_rotation = rotation;
      const auto curve = solve_csr(p, law);
      ASSERT_TRUE(curve.completed) << curve.message;
      for (const auto& q : curve.points) EXPECT_LT(max_free_nominal(q), 1e-8);
    }
  }
}

TEST(Csr, ReactionBalancesMomentOfLoadedEdge) {
  // With P_xX = P_xY = 0, symmetry of P F^T leaves P_yX = -P_yY F_xY / F_xX.
  auto p = csr_problem(30.0, 1e-4, 0.02, 5.0);
  const auto curve = solve_csr(p, composite_law());
  const auto& q = curve.points.back();
  EXPECT_NEAR(q.p(1, 0), -q.p(1, 1) * q.f(0, 1) / q.f(0, 0), 1e-8 * std::abs(q.p(1, 1)));
}

TEST(Rotation, FlagsCoincideWithoutCoupling) {
  const auto law = composite_law();
  for (double theta : {0.0, 90.0}) {
    auto with = csr_problem(theta, 1e-4, 0.03, 5.0);
    auto without = with;
    without.fiber_rotation = false;
    const auto a = solve_csr(with, law);
    const auto b = solve_csr(without, law);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_LT(std::abs(a.points[i].phi_deg), 0.1);
      EXPECT_LE(std::abs(a.points[i].sig_yy - b.points[i].sig_yy), 2e-3 * std::abs(a.points[i].sig_yy));
    }
  }
}

TEST(Rotation, FlagsDivergeAtFifteenDegrees) {
  const auto law = composite_law();
  auto with = csr_problem(15.0, 1e-4, 0.03, 5.0);
  auto without = with;
  without.fiber_rotation = false;
  const auto a = solve_csr(with, law);
  const auto b = solve_csr(without, law);
  ASSERT_TRUE(a.completed && b.completed);
  EXPECT_GT(a.points.back().phi_deg, 1.0);
  EXPECT_GT(std::abs(a.points.back().sig_yy - b.points.back().sig_yy), 0.01 * std::abs(b.points.back().sig_yy));
}

TEST(Creep, HyperelasticLimitHoldsStrain) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto matrix = constitutive::MatrixProperties::from_processes(3000.0, 20.0, {5.0}, {{{800.0, inf, 0}}});
  const evaluator::MixtureLaw law(micromodel::VoigtMixture::composite(testkit::test_fiber(), matrix, 0.5));
  SinglePointProblem p;
  p.angle = kinematics::OffAxisAngle(90.0);
  p.loading = CreepLoading{{20.0, 1.0, 100.0}};
  p.stepping.dt0 = p.stepping.dt_max = 2.0;
  const auto curve = solve_creep(p, law);
  ASSERT_TRUE(curve.completed) << curve.message;
  const double ramp_end = 20.0;
  double held = std::numeric_limits<double>::quiet_NaN();
  for (const auto& q : curve.points) {
    if (q.time < ramp_end) continue;
    if (std::isnan(held)) held = q.eps_yy;
    EXPECT_NEAR(q.eps_yy, held, 1e-12);
  }
}

TEST(Creep, AppliedStressFollowsRampRecurrence) {
  SinglePointProblem p;
  p.angle = kinematics::OffAxisAngle(45.0);
  const pathgen::CreepProtocol protocol{15.0, 0.7, 60.0};
  p.loading = CreepLoading{protocol};
  p.stepping.dt0 = 1.5;
  p.stepping.dt_max = 4.0;
  const auto curve = solve_creep(p, composite_law());
  ASSERT_TRUE(curve.completed) << curve.message;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& prev = curve.points[i - 1];
    const auto& q = curve.points[i];
    EXPECT_EQ(q.applied, protocol.next_stress(prev.applied, q.dt));
    EXPECT_NEAR(q.sig_yy, q.applied, 1e-8);
    EXPECT_LT(max_free_nominal(q), 1e-8);
  }
  EXPECT_EQ(curve.points.back().applied, 15.0);
  EXPECT_NEAR(curve.points.back().time, protocol.total_duration(), 1e-9);
}

TEST(Creep, SingleModeRetardationRate) {
  // Linear standard solid in the deviatoric part: under constant stress the
  // strain rate decays as exp(-k t), k = G G_r / ((G + G_r) eta).
  const double g = 800.0, g_r = 200.0, eta = 8e4;
  const auto matrix = constitutive::MatrixProperties::from_processes(3000.0, g_r, {1e6}, {{{g, eta, 0}}});
  const evaluator::MixtureLaw law(micromodel::VoigtMixture{{{matrix, 1.0}}});
  SinglePointProblem p;
  p.angle = kinematics::OffAxisAngle(90.0);
  p.loading = CreepLoading{{1.0, std::numeric_limits<double>::infinity(), 2000.0}};
  p.stepping.dt0 = p.stepping.dt_max = 2.0;
  const auto curve = solve_creep(p, law);
  ASSERT_TRUE(curve.completed) << curve.message;
  const double k = g * g_r / ((g + g_r) * eta);
  auto rate_at = [&](std::size_t i) {
    return (curve.points[i + 1].eps_yy - curve.points[i].eps_yy) / (curve.points[i + 1].time - curve.points[i].time);
  };
  const std::size_t early = 50, late = 500;
  const double t_early = 0.5 * (curve.points[early].time + curve.points[early + 1].time);
  const double t_late = 0.5 * (curve.points[late].time + curve.points[late + 1].time);
  const double expected = std::exp(-k * (t_late - t_early));
  EXPECT_LT(testkit::relative_error(rate_at(late) / rate_at(early), expected), 0.02);
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) EXPECT_GE(rate_at(i), 0.0);
}

TEST(Creep, ElasticRampMatchesEquivalentStrainRate) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto matrix = constitutive::MatrixProperties::from_processes(3000.0, 20.0, {5.0}, {{{800.0, inf, 0}}});
  const evaluator::MixtureLaw law(micromodel::VoigtMixture::composite(testkit::test_fiber(), matrix, 0.5));
  const double modulus = 1.0 / evaluator::initial_global_stiffness(law, kinematics::OffAxisAngle(90.0), 1.0)
                                   .inverse()(1, 1);
  SinglePointProblem creep;
  creep.angle = kinematics::OffAxisAngle(90.0);
  creep.loading = CreepLoading{{10.0, 0.5, 1.0}};
  creep.stepping.dt0 = creep.stepping.dt_max = 1.0;
  const auto ramp = solve_creep(creep, law);
  const double rate = 0.5 / modulus;
  const auto csr = solve_csr(csr_problem(90.0, rate, 10.0 / modulus, 1.0), law);
  for (std::size_t i = 1; i <= 20; ++i) {
    const auto& a = ramp.points[i];
    const auto& b = csr.points[i];
    EXPECT_LT(testkit::relative_error(a.eps_yy, b.eps_yy), 1e-2);
    EXPECT_LT(testkit::relative_error(a.sig_yy, b.sig_yy), 1e-2);
  }
}

TEST(Problem, LoadingMismatchAndBadInput) {
  const auto law = composite_law();
  SinglePointProblem p;
  p.loading = CreepLoading{{10.0, 1.0, 10.0}};
  EXPECT_THROW(solve_csr(p, law), ConfigError);
  p.loading = CsrLoading{0.0, 0.0, 0.0};
  EXPECT_THROW(solve_csr(p, law), ConfigError);
  EXPECT_THROW(solve_creep(p, law), ConfigError);
  p.loading = CreepLoading{{10.0, -1.0, 10.0}};
  EXPECT_THROW(solve_creep(p, law), DomainError);
  p.loading = CsrLoading{1e-4, 0.01};
  p.stepping.cut = 1.5;
  EXPECT_THROW(solve(p, law), ConfigError);
}

TEST(Problem, FailureReturnsPartialCurveWithDiagnostic) {
  // Asking for an enormous strain in one step from an inadmissible guess.
  auto p = csr_problem(90.0, 1.0, 2.0, 2.0);
  p.stepping.dt_min = 1.0;
  p.stepping.max_cuts = 0;
  p.stepping.max_newton = 1;
  const auto curve = solve_csr(p, composite_law());
  EXPECT_FALSE(curve.completed);
  EXPECT_FALSE(curve.message.empty());
  EXPECT_EQ(curve.points.size(), 1u);
}
