// SPDX-License-Identifier: Apache-2.0
//
// Homogenized material laws seen by the macroscale: a local-frame law of the
// stretch tensor plus the framing that turns it into a global F -> sigma map.
#pragma once

#include "offaxis/dataset.hpp"
#include "offaxis/kinematics.hpp"
#include "offaxis/micromodel.hpp"
#include "offaxis/prnn.hpp"

#include <memory>
#include <string>
#include <vector>

namespace offaxis::evaluator {

using constitutive::MaterialState;

/// History of one macroscopic point. `auxiliary` carries law-specific extras
/// (unit-cell fluctuations).
struct PointHistory {
  std::vector<MaterialState> points;
  Eigen::VectorXd auxiliary;

  bool operator==(const PointHistory& o) const {
    return points == o.points && auxiliary.size() == o.auxiliary.size() && auxiliary == o.auxiliary;
  }
};

struct LocalResult {
  Tensor2 stress = Tensor2::Zero();
  PointHistory history;
};

class LocalLaw {
 public:
  virtual ~LocalLaw() = default;
  virtual PointHistory fresh() const = 0;
  /// sigma(U) in the local frame; U symmetric.
  virtual LocalResult evaluate(const Tensor2& stretch, double dt, const PointHistory& history) const = 0;
  virtual std::string name() const = 0;

  /// d sigma / d U by central differences, engineering-shear columns, Voigt rows.
  Matrix6 stretch_tangent(const Tensor2& stretch, double dt, const PointHistory& history,
                          double relative_step = 1e-7) const;
};

class PrnnLaw final : public LocalLaw {
 public:
  PrnnLaw(prnn::PrnnParams params, prnn::PrnnLayout layout)
      : params_(std::move(params)), layout_(std::move(layout)) {}
  PointHistory fresh() const override;
  LocalResult evaluate(const Tensor2& stretch, double dt, const PointHistory& history) const override;
  std::string name() const override { return "prnn"; }
  const prnn::PrnnParams& params() const { return params_; }
  const prnn::PrnnLayout& layout() const { return layout_; }

 private:
  prnn::PrnnParams params_;
  prnn::PrnnLayout layout_;
};

class MixtureLaw final : public LocalLaw {
 public:
  explicit MixtureLaw(micromodel::VoigtMixture mix) : mix_(std::move(mix)) { mix_.validate(); }
  PointHistory fresh() const override;
  LocalResult evaluate(const Tensor2& stretch, double dt, const PointHistory& history) const override;
  std::string name() const override { return "voigt"; }

 private:
  micromodel::VoigtMixture mix_;
};

class RveLaw final : public LocalLaw {
 public:
  explicit RveLaw(dataset::RveGenerator rve) : rve_(std::move(rve)) {}
  PointHistory fresh() const override;
  LocalResult evaluate(const Tensor2& stretch, double dt, const PointHistory& history) const override;
  std::string name() const override { return "rve"; }

 private:
  dataset::RveGenerator rve_;
};

struct FrameOptions {
  /// When false the fiber reorientation is removed before evaluation and the
  /// stress is not rotated back: fibers stay at the initial angle.
  bool fiber_rotation = true;
  bool with_tangent = true;
};

struct PointResult {
  Tensor2 stress = Tensor2::Zero();     // global Cauchy, MPa
  Matrix9 tangent = Matrix9::Zero();    // d sigma / d F, global
  PointHistory history;
  double reorientation_deg = 0.0;       // phi of the local F
};

/// Global F -> local F -> polar split -> law(U) -> rotate back -> global.
/// With fiber rotation the tangent combines the analytic polar derivative with
/// the finite-difference stretch tangent of the law; without, it is a central
/// difference of the whole map.
PointResult evaluate_point(const LocalLaw& law, const Tensor2& f_global, double dt,
                           kinematics::OffAxisAngle theta0, const PointHistory& history,
                           const FrameOptions& options = {});

/// Initial global stiffness in Voigt form (rows sigma, columns symmetric
/// strain with engineering shear) at F = I for a fresh history.
Matrix6 initial_global_stiffness(const LocalLaw& law, kinematics::OffAxisAngle theta0, double dt);

}  // namespace offaxis::evaluator

namespace offaxis::prnn {

struct FullPointResult {
  Tensor2 stress = Tensor2::Zero();
  Matrix9 tangent = Matrix9::Zero();
  PrnnState state;
};

/// Macroscopic point evaluation through the network in the fiber frame.
FullPointResult full_point_eval(const PrnnParams& params, const PrnnLayout& layout, const Tensor2& f_global,
                                double dt, kinematics::OffAxisAngle theta0, const PrnnState& state);

}  // namespace offaxis::prnn
