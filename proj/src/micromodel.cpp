// SPDX-License-Identifier: Apache-2.0
#include "offaxis/micromodel.hpp"

#include "offaxis/errors.hpp"

#include <cmath>
#include <string>

namespace offaxis::micromodel {

VoigtMixture VoigtMixture::composite(const FiberProperties& fiber, const MatrixProperties& matrix,
                                     double fiber_fraction) {
  VoigtMixture mix{{{fiber, fiber_fraction}, {matrix, 1.0 - fiber_fraction}}};
  mix.validate();
  return mix;
}

void VoigtMixture::validate() const {
  if (constituents.empty()) throw DomainError("mixture needs at least one constituent");
  double sum = 0.0;
  for (const auto& c : constituents) {
    if (!(c.weight > 0.0 && c.weight <= 1.0))
      throw DomainError("mixture weights must lie in (0, 1]");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
}

MixtureState MixtureState::fresh(const VoigtMixture& mix) {
  MixtureState s;
  for (const auto& c : mix.constituents) s.constituents.push_back(constitutive::fresh_state(c.properties));
  return s;
}

MixtureResult voigt_step(const VoigtMixture& mix, const Tensor2& f, double dt,
                         const MixtureState& state) {
  if (state.constituents.size() != mix.constituents.size())
    throw ContractViolation("mixture state does not match the mixture");
  MixtureResult out;
  out.state.constituents.reserve(mix.constituents.size());
  for (std::size_t c = 0; c < mix.constituents.size(); ++c) {
    auto r = constitutive::update(mix.constituents[c].properties, f, dt, state.constituents[c]);
    out.stress += mix.constituents[c].weight * r.stress;
    out.state.constituents.push_back(std::move(r.state));
  }
  return out;
}

std::vector<Tensor2> voigt_evaluate(const VoigtMixture& mix, const pathgen::LoadPath& path) {
  mix.validate();
  std::vector<Tensor2> out;
  out.reserve(path.size());
  auto state = MixtureState::fresh(mix);
  for (std::size_t step = 0; step < path.size(); ++step) {
    try {
      auto r = voigt_step(mix, path.steps[step].stretch, path.steps[step].dt, state);
      out.push_back(r.stress);
      state = std::move(r.state);
    } catch (const DomainError& e) {
      throw SolverError("step " + std::to_string(step) + ": " + e.what(), 0.0, static_cast<int>(step));
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(step) + ": " + e.what(), e.residual(),
                        static_cast<int>(step));
    }
  }
  return out;
}

Tensor2 homogenize(const std::vector<Tensor2>& stresses, const std::vector<double>& weights,
                   const std::vector<double>& jacobians) {
  if (stresses.size() != weights.size() || stresses.size() != jacobians.size())
    throw ContractViolation("homogenize expects equally sized inputs");
  Tensor2 sum = Tensor2::Zero();
  double volume = 0.0;
  for (std::size_t q = 0; q < stresses.size(); ++q) {
    sum += weights[q] * jacobians[q] * stresses[q];
    volume += weights[q] * jacobians[q];
  }
  if (!(volume > 0.0)) throw DomainError("homogenization over a non-positive volume");
  return sum / volume;
}

}  // namespace offaxis::micromodel
