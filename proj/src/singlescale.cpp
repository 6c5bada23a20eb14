// SPDX-License-Identifier: Apache-2.0
#include "offaxis/singlescale.hpp"

#include "offaxis/errors.hpp"

#include <Eigen/LU>

#include <array>
#include <functional>
#include <cmath>

namespace offaxis::singlescale {

namespace {

using Index = std::pair<int, int>;

// Free F components and their work-conjugate nominal stresses.
constexpr std::array<Index, 5> kLateral{{{0, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}}};

struct Evaluation {
  Tensor2 p = Tensor2::Zero();
  evaluator::PointResult point;
};

struct Outcome {
  bool ok = false;
  Tensor2 f = Tensor2::Identity();
  Evaluation eval;
  std::size_t iterations = 0;
  std::string why;
};

class StepSolver {
 public:
  StepSolver(const SinglePointProblem& problem, const evaluator::LocalLaw& law, bool stress_driven)
      : problem_(problem), law_(law) {
    unknowns_.assign(kLateral.begin(), kLateral.end());
    if (stress_driven) unknowns_.push_back({1, 1});
  }

  Outcome solve(Tensor2 f, double dt, const evaluator::PointHistory& history, double target) const {
    const auto n = static_cast<Eigen::Index>(unknowns_.size());
    Outcome out;
    Evaluation ev;
    Eigen::VectorXd r = residual(f, dt, history, target, ev);
    for (std::size_t it = 0;; ++it) {
      if (!r.allFinite()) {
        out.why = "non-finite residual";
        return out;
      }
      if (r.cwiseAbs().maxCoeff() < problem_.newton.tolerance) {
        out.ok = true;
        out.f = f;
        out.eval = std::move(ev);
        out.iterations = it;
        return out;
      }
      if (it == problem_.stepping.max_newton) break;
      Eigen::MatrixXd jac(n, n);
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto [i, j] = unknowns_[static_cast<std::size_t>(c)];
        const double h = problem_.newton.relative_step * (1.0 + std::abs(f(i, j)));
        Tensor2 fp = f, fm = f;
        fp(i, j) += h;
        fm(i, j) -= h;
        Evaluation tmp;
        jac.col(c) = (residual(fp, dt, history, target, tmp) - residual(fm, dt, history, target, tmp)) / (2.0 * h);
      }
      const Eigen::VectorXd dx = jac.fullPivLu().solve(-r);
      if (!dx.allFinite()) {
        out.why = "singular Jacobian";
        return out;
      }
      // Backtrack on the residual norm.
      double alpha = 1.0;
      for (;;) {
        Tensor2 trial = f;
        for (Eigen::Index c = 0; c < n; ++c) {
          const auto [i, j] = unknowns_[static_cast<std::size_t>(c)];
          trial(i, j) += alpha * dx(c);
        }
        Evaluation trial_ev;
        Eigen::VectorXd trial_r;
        bool admissible = true;
        try {
          trial_r = residual(trial, dt, history, target, trial_ev);
        } catch (const DomainError&) {
          admissible = false;
        } catch (const SolverError&) {
          admissible = false;
        }
        if ((admissible && trial_r.allFinite() && trial_r.norm() <= (1.0 - 1e-4 * alpha) * r.norm()) ||
            alpha < 1.0 / 64.0) {
          if (!admissible) {
            out.why = "line search left the admissible region";
            return out;
          }
          f = trial;
          r = std::move(trial_r);
          ev = std::move(trial_ev);
          break;
        }
        alpha *= 0.5;
      }
    }
    out.why = "Newton did not converge in " + std::to_string(problem_.stepping.max_newton) + " iterations";
    return out;
  }

 private:
  Eigen::VectorXd residual(const Tensor2& f, double dt, const evaluator::PointHistory& history, double target,
                           Evaluation& ev) const {
    evaluator::FrameOptions options;
    options.fiber_rotation = problem_.fiber_rotation;
    options.with_tangent = false;
    ev.point = evaluator::evaluate_point(law_, f, dt, problem_.angle, history, options);
    ev.p = kinematics::nominal_stress(ev.point.stress, f);
    Eigen::VectorXd r(static_cast<Eigen::Index>(unknowns_.size()));
    for (std::size_t k = 0; k < unknowns_.size(); ++k) r(static_cast<Eigen::Index>(k)) = ev.p(unknowns_[k].first, unknowns_[k].second);
    if (unknowns_.size() > kLateral.size()) r(r.size() - 1) -= target;
    return r;
  }

  const SinglePointProblem& problem_;
  const evaluator::LocalLaw& law_;
  std::vector<Index> unknowns_;
};

CurvePoint record(double time, double dt, const Outcome& o, double applied) {
  CurvePoint p;
  p.time = time;
  p.dt = dt;
  p.f = o.f;
  p.p = o.eval.p;
  p.eps_yy = o.f(1, 1) - 1.0;
  p.sig_yy = o.eval.p(1, 1);
  p.sig_xy = o.eval.p(0, 1);
  p.phi_deg = o.eval.point.reorientation_deg;
  p.applied = applied;
  p.iterations = o.iterations;
  return p;
}

Curve run(const SinglePointProblem& problem, const evaluator::LocalLaw& law, bool stress_driven, double end,
          const std::function<double(double, double, double)>& prescribe) {
  Curve curve;
  curve.points.push_back(CurvePoint{});
  stepping::StepController ctl(problem.stepping);
  const StepSolver solver(problem, law, stress_driven);
  evaluator::PointHistory history = law.fresh();
  Tensor2 f = Tensor2::Identity();
  double t = 0.0, applied = 0.0;
  const double slack = 1e-12 * std::max(1.0, end);
  while (end - t > slack) {
    const double dt = ctl.propose(t, end);
    const double next = prescribe(applied, t + dt, dt);
    Tensor2 guess = f;
    if (!stress_driven) guess(1, 1) = 1.0 + next;
    Outcome o;
    try {
      o = solver.solve(guess, dt, history, next);
    } catch (const DomainError& e) {
      o.why = e.what();
    } catch (const SolverError& e) {
      o.why = e.what();
    }
    if (!o.ok) {
      if (!ctl.rejected(dt)) {
        curve.completed = false;
        curve.message = "stopped at t = " + std::to_string(t) + " s: " + o.why;
        break;
      }
      continue;
    }
    ctl.accepted();
    t += dt;
    applied = next;
    f = o.f;
    history = o.eval.point.history;
    curve.points.push_back(record(t, dt, o, applied));
  }
  curve.cuts = ctl.total_cuts();
  return curve;
}

}  // namespace

Curve solve_csr(const SinglePointProblem& problem, const evaluator::LocalLaw& law) {
  const auto* csr = std::get_if<CsrLoading>(&problem.loading);
  if (!csr) throw ConfigError("solve_csr needs a strain-rate loading");
  if (!(csr->strain_rate >= 0.0)) throw ConfigError("strain rate must be non-negative");
  double end;
  if (csr->strain_rate > 0.0) {
    if (!(csr->target_strain > 0.0)) throw ConfigError("target strain must be positive");
    end = csr->target_strain / csr->strain_rate;
  } else {
    if (!(csr->duration > 0.0)) throw ConfigError("a zero strain rate needs a positive duration");
    end = csr->duration;
  }
  const double rate = csr->strain_rate;
  return run(problem, law, false, end, [rate](double, double time, double) { return rate * time; });
}

Curve solve_creep(const SinglePointProblem& problem, const evaluator::LocalLaw& law) {
  const auto* creep = std::get_if<CreepLoading>(&problem.loading);
  if (!creep) throw ConfigError("solve_creep needs a creep loading");
  const auto protocol = pathgen::creep_path(creep->protocol.target, creep->protocol.rate, creep->protocol.hold);
  return run(problem, law, true, protocol.total_duration(),
             [protocol](double previous, double, double dt) { return protocol.next_stress(previous, dt); });
}

Curve solve(const SinglePointProblem& problem, const evaluator::LocalLaw& law) {
  return std::holds_alternative<CsrLoading>(problem.loading) ? solve_csr(problem, law) : solve_creep(problem, law);
}

}  // namespace offaxis::singlescale
