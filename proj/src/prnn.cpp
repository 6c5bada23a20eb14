// SPDX-License-Identifier: Apache-2.0
#include "offaxis/prnn.hpp"

#include "offaxis/hashing.hpp"

#include <cmath>

namespace offaxis::prnn {

std::pair<std::size_t, std::size_t> split_points(std::size_t n) {
  if (n < 2) throw DomainError("a network needs at least two material points");
  std::size_t fiber;
  if (n % 2 == 0 && n % 4 != 0)
    fiber = (n + 3) / 4;
  else
    fiber = static_cast<std::size_t>(std::lround(0.25 * static_cast<double>(n)));
  fiber = std::max<std::size_t>(fiber, 1);
  return {fiber, n - fiber};
}

PrnnLayout PrnnLayout::make(std::size_t n, const FiberProperties& fiber, const MatrixProperties& matrix) {
  const auto [nf, nm] = split_points(n);
  PrnnLayout layout;
  layout.points.assign(nf, PointModel::Fiber);
  layout.points.insert(layout.points.end(), nm, PointModel::Matrix);
  layout.fiber = fiber;
  layout.matrix = matrix;
  return layout;
}

std::size_t PrnnLayout::fiber_count() const {
  std::size_t c = 0;
  for (auto p : points) c += p == PointModel::Fiber;
  return c;
}

ModelProperties PrnnLayout::properties(std::size_t point) const {
  if (points.at(point) == PointModel::Fiber) return fiber;
  return matrix;
}

Voigt6 PrnnParams::encoder(std::size_t point) const {
  return Eigen::Map<const Voigt6>(values.data() + kParamsPerPoint * point);
}

Voigt6 PrnnParams::decoder(std::size_t point) const {
  return Eigen::Map<const Voigt6>(values.data() + kParamsPerPoint * point + 6);
}

void PrnnParams::set_encoder(std::size_t point, const Voigt6& w) {
  Eigen::Map<Voigt6>(values.data() + kParamsPerPoint * point) = w;
}

void PrnnParams::set_decoder(std::size_t point, const Voigt6& d) {
  Eigen::Map<Voigt6>(values.data() + kParamsPerPoint * point + 6) = d;
}

PrnnParams PrnnParams::random(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> diagonal(0.5, 1.5), off(-0.25, 0.25), dec(0.0, 2.0 / n);
  PrnnParams p;
  p.values.resize(kParamsPerPoint * n);
  for (std::size_t j = 0; j < n; ++j) {
    Voigt6 w, d;
    for (int k = 0; k < 6; ++k) w(k) = k < 3 ? diagonal(rng) : off(rng);
    for (int k = 0; k < 6; ++k) d(k) = dec(rng);
    p.set_encoder(j, w);
    p.set_decoder(j, d);
  }
  return p;
}

PrnnParams PrnnParams::mixture_equivalent(const PrnnLayout& layout, double vf) {
  const std::size_t nf = layout.fiber_count();
  const std::size_t nm = layout.size() - nf;
  PrnnParams p;
  p.values.resize(kParamsPerPoint * layout.size());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    p.set_encoder(j, Voigt6::Ones());
    const double share = layout.points[j] == PointModel::Fiber ? vf / nf : (1.0 - vf) / nm;
    p.set_decoder(j, Voigt6::Constant(share));
  }
  return p;
}

std::string PrnnParams::sha256() const {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(values.data()),
                                     values.size() * sizeof(double)));
}

PrnnState PrnnState::fresh(const PrnnLayout& layout) {
  PrnnState s;
  s.points.reserve(layout.size());
  for (std::size_t j = 0; j < layout.size(); ++j)
    s.points.push_back(layout.points[j] == PointModel::Fiber ? MaterialState::empty()
                                                            : MaterialState::fresh(layout.matrix));
  return s;
}

Tensor2 encode(const Voigt6& w, const Tensor2& u) {
  return Tensor2::Identity() + from_voigt(w).cwiseProduct(u - Tensor2::Identity());
}

ForwardResult forward(const PrnnParams& params, const PrnnLayout& layout, const Tensor2& u, double dt,
                      const PrnnState& state) {
  if (params.values.size() != kParamsPerPoint * layout.size())
    throw ContractViolation("parameter vector does not match the layout");
  if (state.points.size() != layout.size())
    throw ContractViolation("network state does not match the layout");

  ForwardResult out;
  out.state.points.reserve(layout.size());
  out.point_stress.reserve(layout.size());
  Voigt6 decoded = Voigt6::Zero();
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const Tensor2 uj = encode(params.encoder(j), u);
    const double det = uj.determinant();
    if (!(det > 0.0))
      throw PointEvaluationError("fictitious stretch of point " + std::to_string(j) + " has det <= 0", j);
    constitutive::MaterialPointResult r;
    if (layout.points[j] == PointModel::Fiber)
      r = constitutive::fiber_update(uj, layout.fiber);
    else
      r = constitutive::matrix_update(uj, dt, state.points[j], layout.matrix);
    const Voigt6 s = to_voigt(r.stress);
    decoded += params.decoder(j).cwiseProduct(s);
    out.point_stress.push_back(s);
    out.state.points.push_back(std::move(r.state));
  }
  out.stress = from_voigt(decoded);
  return out;
}

PrnnLayout transfer_properties(const PrnnParams& params, const PrnnLayout& layout, const ModelProperties& fiber,
                               const ModelProperties& matrix, std::size_t mode_count) {
  if (params.values.size() != kParamsPerPoint * layout.size())
    throw ContractViolation("parameter vector does not match the layout");
  const auto* f = std::get_if<FiberProperties>(&fiber);
  const auto* m = std::get_if<MatrixProperties>(&matrix);
  if (!f) throw DomainError("fiber points need fiber properties");
  if (!m) throw DomainError("matrix points need matrix properties");
  PrnnLayout out = layout;
  out.fiber = *f;
  out.matrix = constitutive::mode_subset(*m, mode_count);
  return out;
}

}  // namespace offaxis::prnn
