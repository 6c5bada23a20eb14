// SPDX-License-Identifier: Apache-2.0
#include "offaxis/constitutive.hpp"

#include "offaxis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace offaxis::constitutive {

namespace {

const Vector3 kFiberAxis = Vector3::UnitX();

double von_mises(const Tensor2& s) {
  const Tensor2 d = deviator(s);
  return std::sqrt(1.5 * d.cwiseProduct(d).sum());
}

void require_positive_det(double j) {
  if (!(j > 0.0) || !std::isfinite(j))
    throw DomainError("material update requires det F > 0 (det = " + std::to_string(j) + ")");
}

// Trial elastic Finger tensor of one mode in its eigenbasis.
struct ModeTrial {
  Eigen::Matrix3d vectors = Eigen::Matrix3d::Identity();
  Vector3 log_values = Vector3::Zero();
  bool identity = true;
  double c = 0.0;  // G dt / eta0
  double g_over_j = 0.0;

  Tensor2 finger(double s) const {
    if (identity) return Tensor2::Identity();
    const Vector3 b = (s * log_values).array().exp().matrix();
    return vectors * b.asDiagonal() * vectors.transpose();
  }

  Tensor2 finger_derivative(double s) const {
    if (identity) return Tensor2::Zero();
    const Vector3 b = (s * log_values).array().exp().matrix();
    return vectors * b.cwiseProduct(log_values).asDiagonal() * vectors.transpose();
  }
};

// Shift factor of the Eyring viscosity: eta = eta0 / h(tau), h = sinh(x)/x.
double eyring_h(double x) {
  if (x < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

double eyring_h_prime(double x) {  // dh/dx
  if (x < 1e-4) return x / 3.0;
  return (x * std::cosh(x) - std::sinh(x)) / (x * x);
}

double relaxation_factor(double c, double h) {
  const double s = 1.0 / (1.0 + c * h);
  return std::isfinite(s) ? s : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

FiberProperties FiberProperties::with_shear_modulus_12(double g12) const {
  FiberProperties out = *this;
  out.alpha = mu - g12;
  return out;
}

Matrix6 FiberProperties::small_strain_stiffness() const {
  Matrix6 c = Matrix6::Zero();
  const double c22 = lambda + 2.0 * mu;
  c(0, 0) = lambda + 2.0 * mu + 4.0 * beta + 8.0 * gamma - 4.0 * alpha;
  c(1, 1) = c22;
  c(2, 2) = c22;
  c(0, 1) = c(1, 0) = lambda + 2.0 * beta;
  c(0, 2) = c(2, 0) = lambda + 2.0 * beta;
  c(1, 2) = c(2, 1) = lambda;
  c(3, 3) = mu - alpha;  // xy
  c(4, 4) = mu;          // yz
  c(5, 5) = mu - alpha;  // zx
  return c;
}

void FiberProperties::validate() const {
  if (!(mu > 0.0)) throw DomainError("fiber mu must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix6> solver(small_strain_stiffness(), Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0))
    throw DomainError("fiber properties give a non-convex energy at F = I");
}

double MatrixProperties::instantaneous_shear_modulus() const {
  double g = hardening_modulus;
  for (const auto& m : modes) g += m.shear_modulus;
  return g;
}

Matrix6 MatrixProperties::small_strain_stiffness() const {
  const double g = instantaneous_shear_modulus();
  const double k = bulk_modulus;
  Matrix6 c = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = k - 2.0 * g / 3.0;
    c(i, i) = k + 4.0 * g / 3.0;
    c(i + 3, i + 3) = g;
  }
  return c;
}

void MatrixProperties::validate() const {
  if (!(bulk_modulus > 0.0)) throw DomainError("matrix bulk modulus must be positive");
  if (!(hardening_modulus > 0.0)) throw DomainError("matrix hardening modulus must be positive");
  if (activation_stress.empty()) throw DomainError("matrix model needs at least one process");
  for (double t : activation_stress)
    if (!(t > 0.0)) throw DomainError("activation stresses must be positive");
  if (modes.empty()) throw DomainError("matrix model needs at least one mode");
  for (const auto& m : modes) {
    if (!(m.shear_modulus > 0.0) || !(m.viscosity > 0.0))
      throw DomainError("mode moduli and viscosities must be positive");
    if (m.process >= activation_stress.size())
      throw DomainError("mode assigned to a non-existent process");
  }
}

MatrixProperties MatrixProperties::from_processes(
    double bulk_modulus, double hardening_modulus, const std::vector<double>& activation_stress,
    const std::vector<std::vector<MaxwellMode>>& per_process) {
  if (per_process.size() != activation_stress.size())
    throw DomainError("one mode list per process is required");
  MatrixProperties props;
  props.bulk_modulus = bulk_modulus;
  props.hardening_modulus = hardening_modulus;
  props.activation_stress = activation_stress;
  std::size_t longest = 0;
  for (const auto& list : per_process) longest = std::max(longest, list.size());
  for (std::size_t k = 0; k < longest; ++k) {
    for (std::size_t p = 0; p < per_process.size(); ++p) {
      if (k >= per_process[p].size()) continue;
      MaxwellMode m = per_process[p][k];
      m.process = p;
      props.modes.push_back(m);
    }
  }
  return props;
}

MatrixProperties mode_subset(const MatrixProperties& props, std::size_t n) {
  if (n < 1 || n > props.mode_count())
    throw DomainError("mode count " + std::to_string(n) + " outside [1, " +
                      std::to_string(props.mode_count()) + "]");
  MatrixProperties out = props;
  out.modes.resize(n);
  return out;
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

MaterialState MaterialState::fresh(const MatrixProperties& props) {
  MaterialState s;
  s.elastic_finger.assign(props.mode_count(), to_voigt(Tensor2::Identity()));
  s.plastic_strain.assign(props.process_count(), 0.0);
  return s;
}

MaterialState fresh_state(const ModelProperties& props) {
  if (const auto* m = std::get_if<MatrixProperties>(&props)) return MaterialState::fresh(*m);
  return MaterialState::empty();
}

std::vector<double> MaterialState::pack_history() const {
  std::vector<double> out;
  out.reserve(history_size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.push_back(deformation(i, j));
  for (const auto& b : elastic_finger)
    for (int k = 0; k < 6; ++k) out.push_back(b(k));
  return out;
}

void MaterialState::unpack_history(const std::vector<double>& values) {
  if (values.size() != history_size())
    throw ContractViolation("history vector has the wrong size");
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) deformation(i, j) = values[pos++];
  for (auto& b : elastic_finger)
    for (int k = 0; k < 6; ++k) b(k) = values[pos++];
}

// ---------------------------------------------------------------------------
// Fiber
// ---------------------------------------------------------------------------

MaterialPointResult fiber_update(const Tensor2& f, const FiberProperties& p) {
  const double j = f.determinant();
  require_positive_det(j);

  const Tensor2 c = f.transpose() * f;
  const Tensor2 c_inv = c.inverse();
  const Vector3 ca = c * kFiberAxis;
  const double ln_j = std::log(j);
  const double i4m1 = kFiberAxis.dot(ca) - 1.0;
  const Tensor2 axa = kFiberAxis * kFiberAxis.transpose();

  // S = 2 dpsi/dC
  const Tensor2 s = p.mu * (Tensor2::Identity() - c_inv) + (p.lambda * ln_j + p.beta * i4m1) * c_inv +
                    2.0 * (p.alpha + p.beta * ln_j + 2.0 * p.gamma * i4m1) * axa -
                    p.alpha * (kFiberAxis * ca.transpose() + ca * kFiberAxis.transpose());

  MaterialPointResult out;
  out.stress = f * s * f.transpose() / j;
  out.stress = 0.5 * (out.stress + out.stress.transpose()).eval();
  return out;
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

MaterialPointResult matrix_update(const Tensor2& f, double dt, const MaterialState& state,
                                  const MatrixProperties& p) {
  if (state.elastic_finger.size() != p.mode_count() ||
      state.plastic_strain.size() != p.process_count())
    throw ContractViolation("material state does not match the matrix mode/process count");
  if (!(dt > 0.0)) throw DomainError("time increment must be positive");

  const double j = f.determinant();
  require_positive_det(j);
  const double j_prev = state.deformation.determinant();
  require_positive_det(j_prev);

  const Tensor2 f_bar = std::cbrt(1.0 / j) * f;
  const Tensor2 f_bar_prev = std::cbrt(1.0 / j_prev) * state.deformation;
  const Tensor2 f_inc = f_bar * f_bar_prev.inverse();
  const bool rigid_increment = (f_inc == Tensor2::Identity());

  MaterialPointResult out;
  out.state = state;
  out.state.deformation = f;

  Tensor2 sigma = p.bulk_modulus * (j - 1.0) * Tensor2::Identity() +
                  (p.hardening_modulus / j) * deviator(f_bar * f_bar.transpose());

  std::vector<ModeTrial> trials(p.mode_count());
  for (std::size_t m = 0; m < p.mode_count(); ++m) {
    Tensor2 be = from_voigt(state.elastic_finger[m]);
    const double det_be = be.determinant();
    if (!(det_be > 0.0))
      throw DomainError("elastic Finger tensor of mode " + std::to_string(m) + " is not SPD");
    if (det_be != 1.0) be *= std::cbrt(1.0 / det_be);
    const Tensor2 trial = rigid_increment ? be : Tensor2(f_inc * be * f_inc.transpose());

    ModeTrial& t = trials[m];
    t.c = p.modes[m].shear_modulus * dt / p.modes[m].viscosity;
    t.g_over_j = p.modes[m].shear_modulus / j;
    if (trial == Tensor2::Identity()) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(0.5 * (trial + trial.transpose()));
    t.vectors = solver.eigenvectors();
    t.log_values = solver.eigenvalues().cwiseMax(std::numeric_limits<double>::min()).array().log().matrix();
    t.identity = false;
  }

  for (std::size_t proc = 0; proc < p.process_count(); ++proc) {
    const double tau0 = p.activation_stress[proc];
    std::vector<std::size_t> members;
    for (std::size_t m = 0; m < p.mode_count(); ++m)
      if (p.modes[m].process == proc) members.push_back(m);
    if (members.empty()) continue;

    auto driving = [&](double tau, std::vector<double>* factors) {
      const double h = eyring_h(tau / tau0);
      Tensor2 s = Tensor2::Zero();
      for (std::size_t k = 0; k < members.size(); ++k) {
        const ModeTrial& t = trials[members[k]];
        const double sf = relaxation_factor(t.c, h);
        if (factors) (*factors)[k] = sf;
        s += t.g_over_j * deviator(t.finger(sf));
      }
      return s;
    };

    std::vector<double> factors(members.size(), 1.0);
    // Modes of one process may partly cancel, so the bracket uses the sum of
    // per-mode equivalent stresses, which bounds vm(S(tau)) for every tau.
    double tau_trial = 0.0;
    for (std::size_t m : members) tau_trial += von_mises(trials[m].g_over_j * trials[m].finger(1.0));

    double tau = 0.0;
    if (tau_trial > 0.0) {
      // Safeguarded Newton on r(tau) = tau - vm(S(tau)); r(0) <= 0 <= r(tau_trial).
      double lo = 0.0, hi = tau_trial;
      tau = tau_trial;
      const double tol = 1e-10 * tau0;
      double previous_step = hi - lo;
      bool converged = false;
      int polish = 0;
      for (int it = 0; it < 100; ++it) {
        const Tensor2 s = driving(tau, &factors);
        const double vm = von_mises(s);
        const double r = tau - vm;
        if (r < 0.0) lo = tau; else hi = tau;
        if (converged && ++polish > 1) break;
        if (std::abs(r) < tol || hi - lo < tol) converged = true;

        const double x = tau / tau0;
        const double dh = eyring_h_prime(x) / tau0;
        const double h = eyring_h(x);
        Tensor2 ds = Tensor2::Zero();
        for (std::size_t k = 0; k < members.size(); ++k) {
          const ModeTrial& t = trials[members[k]];
          const double sf = factors[k];
          const double dsf = std::isfinite(h) ? -sf * sf * t.c * dh : 0.0;
          ds += t.g_over_j * deviator(t.finger_derivative(sf)) * dsf;
        }
        const double dvm = vm > 0.0 ? 1.5 * deviator(s).cwiseProduct(ds).sum() / vm : 0.0;
        const double dr = 1.0 - dvm;

        double next = tau - r / dr;
        const bool slow = std::abs(2.0 * r) > std::abs(previous_step * dr);
        if (converged) {
          if (!(next >= lo && next <= hi) || !std::isfinite(next)) break;
        } else if (!(next > lo && next < hi) || !std::isfinite(next) || slow) {
          next = 0.5 * (lo + hi);
        }
        const double step = std::abs(next - tau);
        previous_step = step;
        tau = next;
      }
      if (!converged) {
        throw SolverError("Eyring corrector did not converge for process " + std::to_string(proc),
                          std::abs(tau - von_mises(driving(tau, nullptr))),
                          static_cast<int>(members.front()));
      }
    }

    const Tensor2 s = driving(tau, &factors);
    sigma += s;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::size_t m = members[k];
      out.state.elastic_finger[m] = to_voigt(trials[m].finger(factors[k]));
    }

    // Equivalent plastic strain from the lead mode of the process.
    const std::size_t lead = members.front();
    const double eta = p.modes[lead].viscosity / eyring_h(tau / tau0);
    const double lead_vm = von_mises(trials[lead].g_over_j * deviator(trials[lead].finger(factors[0])));
    if (std::isfinite(eta) && eta > 0.0) out.state.plastic_strain[proc] += dt * lead_vm / (3.0 * eta);
  }

  out.stress = 0.5 * (sigma + sigma.transpose());
  return out;
}

MaterialPointResult update(const ModelProperties& props, const Tensor2& f, double dt,
                           const MaterialState& state) {
  if (const auto* fiber = std::get_if<FiberProperties>(&props)) return fiber_update(f, *fiber);
  return matrix_update(f, dt, state, std::get<MatrixProperties>(props));
}

Matrix6 consistent_tangent(const ModelProperties& props, const Tensor2& f, double dt,
                           const MaterialState& state, double relative_step) {
  const double h = relative_step * (1.0 + max_abs(f));
  Matrix6 tangent;
  for (int k = 0; k < 6; ++k) {
    const Tensor2 e = voigt_direction(k);
    const Tensor2 plus = update(props, f + h * e, dt, state).stress;
    const Tensor2 minus = update(props, f - h * e, dt, state).stress;
    tangent.col(k) = to_voigt(plus - minus) / (2.0 * h);
  }
  return tangent;
}

Matrix9 stress_gradient(const ModelProperties& props, const Tensor2& f, double dt,
                        const MaterialState& state, double relative_step) {
  const double h = relative_step * (1.0 + max_abs(f));
  Matrix9 out;
  for (int c = 0; c < 9; ++c) {
    const Tensor2 e = unit_tensor(c);
    const Tensor2 plus = update(props, f + h * e, dt, state).stress;
    const Tensor2 minus = update(props, f - h * e, dt, state).stress;
    out.col(c) = flatten(plus - minus) / (2.0 * h);
  }
  return out;
}

}  // namespace offaxis::constitutive
