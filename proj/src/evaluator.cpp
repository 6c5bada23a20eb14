// SPDX-License-Identifier: Apache-2.0
#include "offaxis/evaluator.hpp"

#include "offaxis/errors.hpp"

#include <numbers>

namespace offaxis::evaluator {

Matrix6 LocalLaw::stretch_tangent(const Tensor2& u, double dt, const PointHistory& history,
                                  double relative_step) const {
  const double h = relative_step * (1.0 + max_abs(u));
  Matrix6 out;
  for (int k = 0; k < 6; ++k) {
    const Tensor2 e = voigt_direction(k);
    const Tensor2 plus = evaluate(u + h * e, dt, history).stress;
    const Tensor2 minus = evaluate(u - h * e, dt, history).stress;
    out.col(k) = to_voigt(plus - minus) / (2.0 * h);
  }
  return out;
}

PointHistory PrnnLaw::fresh() const {
  return {prnn::PrnnState::fresh(layout_).points, {}};
}

LocalResult PrnnLaw::evaluate(const Tensor2& u, double dt, const PointHistory& history) const {
  auto r = prnn::forward(params_, layout_, u, dt, prnn::PrnnState{history.points});
  return {r.stress, {std::move(r.state.points), {}}};
}

PointHistory MixtureLaw::fresh() const {
  return {micromodel::MixtureState::fresh(mix_).constituents, {}};
}

LocalResult MixtureLaw::evaluate(const Tensor2& u, double dt, const PointHistory& history) const {
  auto r = micromodel::voigt_step(mix_, u, dt, micromodel::MixtureState{history.points});
  return {r.stress, {std::move(r.state.constituents), {}}};
}

PointHistory RveLaw::fresh() const {
  auto s = micromodel::RveState::fresh(rve_.mesh, rve_.materials);
  return {std::move(s.points), std::move(s.fluctuation)};
}

LocalResult RveLaw::evaluate(const Tensor2& u, double dt, const PointHistory& history) const {
  micromodel::RveState state{history.auxiliary, history.points};
  auto r = micromodel::rve_solve_step(rve_.mesh, rve_.materials, u, dt, state, rve_.settings);
  return {r.stress, {std::move(r.state.points), std::move(r.state.fluctuation)}};
}

namespace {

Voigt6 engineering_voigt(const Tensor2& t) {
  Voigt6 v = to_voigt(t);
  v.tail<3>() *= 2.0;
  return v;
}

}  // namespace

PointResult evaluate_point(const LocalLaw& law, const Tensor2& f_global, double dt,
                           kinematics::OffAxisAngle theta0, const PointHistory& history,
                           const FrameOptions& options) {
  const double det = f_global.determinant();
  if (!(det > 0.0)) throw DomainError("point evaluation requires det F > 0");

  const auto q0 = kinematics::fiber_frame(theta0);
  Tensor2 f_local = kinematics::to_local(f_global, q0);
  PointResult out;
  out.reorientation_deg = kinematics::reorientation_angle(f_local);

  Tensor2 r_phi = Tensor2::Identity();
  if (!options.fiber_rotation) {
    r_phi = kinematics::in_plane_rotation(out.reorientation_deg * std::numbers::pi / 180.0).matrix();
    f_local = r_phi.transpose() * f_local;
  }

  const auto polar = kinematics::polar_decompose(f_local);
  const Tensor2& r = polar.rotation.matrix();
  const Tensor2& u = polar.stretch.matrix();
  LocalResult local = law.evaluate(u, dt, history);
  const Tensor2 sigma_u = local.stress;
  Tensor2 sigma_local = r * sigma_u * r.transpose();
  sigma_local = 0.5 * (sigma_local + sigma_local.transpose()).eval();
  out.stress = kinematics::to_global_stress(sigma_local, q0);
  out.history = std::move(local.history);

  if (options.with_tangent && options.fiber_rotation) {
    const Matrix6 n = law.stretch_tangent(u, dt, history);
    const Tensor2& q = q0.matrix();
    for (int c = 0; c < 9; ++c) {
      const Tensor2 df_local = q * unit_tensor(c) * q.transpose();
      const auto d = kinematics::polar_derivative(polar, df_local);
      const Tensor2 dsigma_u = from_voigt(n * engineering_voigt(d.stretch));
      const Tensor2 dsigma_local = d.rotation * sigma_u * r.transpose() + r * dsigma_u * r.transpose() +
                                   r * sigma_u * d.rotation.transpose();
      out.tangent.col(c) = flatten(q.transpose() * dsigma_local * q);
    }
  } else if (options.with_tangent) {
    FrameOptions plain = options;
    plain.with_tangent = false;
    const double h = 1e-7 * (1.0 + max_abs(f_global));
    for (int c = 0; c < 9; ++c) {
      const Tensor2 e = h * unit_tensor(c);
      const Tensor2 plus = evaluate_point(law, f_global + e, dt, theta0, history, plain).stress;
      const Tensor2 minus = evaluate_point(law, f_global - e, dt, theta0, history, plain).stress;
      out.tangent.col(c) = flatten(plus - minus) / (2.0 * h);
    }
  }
  return out;
}

Matrix6 initial_global_stiffness(const LocalLaw& law, kinematics::OffAxisAngle theta0, double dt) {
  const auto p = evaluate_point(law, Tensor2::Identity(), dt, theta0, law.fresh());
  // Symmetric strain eps (engineering shear) -> dF = eps tensor.
  Matrix6 c;
  for (int k = 0; k < 6; ++k) {
    const Tensor2 e = voigt_direction(k);
    c.col(k) = to_voigt(unflatten(p.tangent * flatten(e)));
  }
  return c;
}

}  // namespace offaxis::evaluator

namespace offaxis::prnn {

FullPointResult full_point_eval(const PrnnParams& params, const PrnnLayout& layout, const Tensor2& f_global,
                                double dt, kinematics::OffAxisAngle theta0, const PrnnState& state) {
  const evaluator::PrnnLaw law(params, layout);
  auto r = evaluator::evaluate_point(law, f_global, dt, theta0, {state.points, {}});
  return {r.stress, r.tangent, PrnnState{std::move(r.history.points)}};
}

}  // namespace offaxis::prnn
