// SPDX-License-Identifier: Apache-2.0
//
// Physically recurrent network: encoder -> embedded material points -> sparse
// decoder. Learned weights never touch the material models, so properties and
// mode counts can be swapped after training.
#pragma once

#include "offaxis/constitutive.hpp"
#include "offaxis/errors.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace offaxis::prnn {

using constitutive::FiberProperties;
using constitutive::MaterialState;
using constitutive::MatrixProperties;
using constitutive::ModelProperties;

enum class PointModel { Fiber, Matrix };

/// Raised when a fictitious stretch is not admissible (det <= 0).
class PointEvaluationError : public DomainError {
 public:
  PointEvaluationError(const std::string& what, std::size_t point) : DomainError(what), point_(point) {}
  std::size_t point() const noexcept { return point_; }

 private:
  std::size_t point_;
};

/// (fiber, matrix) point counts for N points: a quarter of N, rounded up when
/// N is even but not a multiple of four, to nearest otherwise.
std::pair<std::size_t, std::size_t> split_points(std::size_t n);

/// Fiber points come first.
struct PrnnLayout {
  std::vector<PointModel> points;
  FiberProperties fiber;
  MatrixProperties matrix;

  static PrnnLayout make(std::size_t n, const FiberProperties& fiber, const MatrixProperties& matrix);
  std::size_t size() const { return points.size(); }
  std::size_t fiber_count() const;
  ModelProperties properties(std::size_t point) const;
};

inline constexpr std::size_t kParamsPerPoint = 12;

/// Per point: encoder weights (6, Voigt order) then decoder weights (6).
struct PrnnParams {
  std::vector<double> values;

  std::size_t point_count() const { return values.size() / kParamsPerPoint; }
  Voigt6 encoder(std::size_t point) const;
  Voigt6 decoder(std::size_t point) const;
  void set_encoder(std::size_t point, const Voigt6& w);
  void set_decoder(std::size_t point, const Voigt6& d);

  /// Encoder diagonal U(0.5, 1.5), off-diagonal U(-0.25, 0.25), decoder U(0, 2/N).
  static PrnnParams random(std::size_t n, std::mt19937_64& rng);
  /// Unit encoder; decoder spreads vf over fiber points and 1 - vf over matrix points.
  static PrnnParams mixture_equivalent(const PrnnLayout& layout, double fiber_fraction);

  /// SHA-256 of the little-endian bytes of `values`.
  std::string sha256() const;
  bool operator==(const PrnnParams&) const = default;
};

struct PrnnState {
  std::vector<MaterialState> points;
  static PrnnState fresh(const PrnnLayout& layout);
  bool operator==(const PrnnState&) const = default;
};

/// U_j = I + W_j (.) (U - I), elementwise on symmetric tensors.
Tensor2 encode(const Voigt6& weights, const Tensor2& stretch);

struct ForwardResult {
  Tensor2 stress = Tensor2::Zero();
  PrnnState state;
  std::vector<Voigt6> point_stress;  // per point, Voigt tensor components
};

/// One time step in the local frame. Throws PointEvaluationError when a
/// fictitious stretch has det <= 0 and ContractViolation on a stale state.
ForwardResult forward(const PrnnParams& params, const PrnnLayout& layout, const Tensor2& stretch, double dt,
                      const PrnnState& state);

/// Swaps properties and mode count; parameters are not touched. Throws
/// DomainError when the fiber/matrix slots receive the wrong model family.
PrnnLayout transfer_properties(const PrnnParams& params, const PrnnLayout& layout,
                               const ModelProperties& fiber, const ModelProperties& matrix,
                               std::size_t mode_count);

}  // namespace offaxis::prnn
