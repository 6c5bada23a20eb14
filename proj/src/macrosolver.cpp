// SPDX-License-Identifier: Apache-2.0
#include "offaxis/macrosolver.hpp"

#include "offaxis/errors.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace offaxis::macro {

namespace {

constexpr int kFree = -1;   // dof index in the reduced system is stored separately
constexpr int kFixed = -2;

struct ElementGeometry {
  std::array<Eigen::Vector3d, 6> grad;  // reference gradients at the centroid
  double volume = 0.0;
  double hourglass = 0.0;               // stiffness per node pair
};

struct ElementState {
  evaluator::PointResult point;
  Tensor2 f = Tensor2::Identity();
  Tensor2 p = Tensor2::Zero();
};

std::array<Eigen::Vector3d, 6> natural_gradients() {
  // N = L_a (1 -+ zeta) / 2 with L = (1 - r - s, r, s), at r = s = 1/3, zeta = 0.
  const std::array<Eigen::Vector3d, 3> dl{{{-1.0, -1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  std::array<Eigen::Vector3d, 6> out;
  for (int a = 0; a < 3; ++a) {
    out[static_cast<std::size_t>(a)] = 0.5 * dl[static_cast<std::size_t>(a)];
    out[static_cast<std::size_t>(a)].z() = -0.5 / 3.0;
    out[static_cast<std::size_t>(a + 3)] = 0.5 * dl[static_cast<std::size_t>(a)];
    out[static_cast<std::size_t>(a + 3)].z() = 0.5 / 3.0;
  }
  return out;
}

std::vector<ElementGeometry> element_geometry(const MacroMesh& mesh, double hourglass_modulus) {
  const auto dn = natural_gradients();
  std::vector<ElementGeometry> out(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
    for (std::size_t a = 0; a < 6; ++a) jac += mesh.nodes[static_cast<std::size_t>(el[a])] * dn[a].transpose();
    const double det = jac.determinant();
    if (!(det > 0.0)) throw DomainError("non-positive element Jacobian in element " + std::to_string(e));
    const Eigen::Matrix3d jit = jac.inverse().transpose();
    auto& g = out[e];
    for (std::size_t a = 0; a < 6; ++a) g.grad[a] = jit * dn[a];
    // Reference prism has unit volume (triangle area 1/2, zeta span 2).
    g.volume = det;
    const double height =
        (mesh.nodes[static_cast<std::size_t>(el[3])] - mesh.nodes[static_cast<std::size_t>(el[0])]).norm();
    g.hourglass = hourglass_modulus * g.volume / (height * height);
  }
  return out;
}

class Assembler {
 public:
  Assembler(const MacroMesh& mesh, const MacroProblem& problem, const evaluator::LocalLaw& law,
            std::vector<ElementGeometry> geometry)
      : mesh_(mesh), problem_(problem), law_(law), geom_(std::move(geometry)) {}

  /// Evaluates every element at displacement u. Throws DomainError or
  /// SolverError from the point evaluations.
  void evaluate(const Eigen::VectorXd& u, double dt, const std::vector<evaluator::PointHistory>& history,
                std::vector<ElementState>& out) const {
    const std::size_t ne = mesh_.element_count();
    out.resize(ne);
    evaluator::FrameOptions options;
    options.fiber_rotation = problem_.solver.fiber_rotation;
    options.with_tangent = true;
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        const auto& el = mesh_.elements[e];
        Tensor2 f = Tensor2::Identity();
        for (std::size_t a = 0; a < 6; ++a)
          f += u.segment<3>(3 * static_cast<Eigen::Index>(el[a])) * geom_[e].grad[a].transpose();
        auto& s = out[e];
        s.f = f;
        s.point = evaluator::evaluate_point(law_, f, dt, problem_.coupon.angle, history[e], options);
        s.p = kinematics::nominal_stress(s.point.stress, f);
      }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(problem_.solver.threads, ne));
    if (threads == 1) {
      work(0, ne);
      return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (ne + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(ne, b + chunk);
      pool.emplace_back([&, b, e, t] {
        try {
          work(b, e);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  /// Nodal internal forces, in element order so the sum is reproducible.
  Eigen::VectorXd internal_force(const Eigen::VectorXd& u, const std::vector<ElementState>& states) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(u.size());
    for (std::size_t e = 0; e < states.size(); ++e) {
      const auto& el = mesh_.elements[e];
      const auto& g = geom_[e];
      for (std::size_t a = 0; a < 6; ++a)
        r.segment<3>(3 * static_cast<Eigen::Index>(el[a])) += g.volume * (states[e].p * g.grad[a]);
      if (g.hourglass > 0.0) {
        const auto d = pair_differences(u, el);
        const Eigen::Vector3d mean = (d[0] + d[1] + d[2]) / 3.0;
        for (std::size_t a = 0; a < 3; ++a) {
          const Eigen::Vector3d fa = g.hourglass * (d[a] - mean);
          r.segment<3>(3 * static_cast<Eigen::Index>(el[a + 3])) += fa;
          r.segment<3>(3 * static_cast<Eigen::Index>(el[a])) -= fa;
        }
      }
    }
    return r;
  }

  /// Tangent restricted to the reduced equations `eq` (one entry per dof).
  Eigen::SparseMatrix<double> tangent(const std::vector<ElementState>& states, const std::vector<int>& eq,
                                      Eigen::Index n) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(states.size() * 324);
    for (std::size_t e = 0; e < states.size(); ++e) {
      const auto& el = mesh_.elements[e];
      const auto& g = geom_[e];
      const Matrix9 a = kinematics::nominal_stress_tangent(states[e].point.stress, states[e].f, states[e].point.tangent);
      for (std::size_t p = 0; p < 6; ++p)
        for (int i = 0; i < 3; ++i) {
          const int row = eq[static_cast<std::size_t>(3 * el[p] + i)];
          if (row < 0) continue;
          for (std::size_t q = 0; q < 6; ++q)
            for (int k = 0; k < 3; ++k) {
              const int col = eq[static_cast<std::size_t>(3 * el[q] + k)];
              if (col < 0) continue;
              double v = 0.0;
              for (int jj = 0; jj < 3; ++jj)
                for (int ll = 0; ll < 3; ++ll) v += g.grad[p](jj) * a(3 * i + jj, 3 * k + ll) * g.grad[q](ll);
              trip.emplace_back(row, col, g.volume * v);
            }
        }
      if (g.hourglass > 0.0) {
        for (std::size_t a = 0; a < 3; ++a)
          for (std::size_t b = 0; b < 3; ++b) {
            const double h = g.hourglass * ((a == b ? 1.0 : 0.0) - 1.0 / 3.0);
            for (int c = 0; c < 3; ++c) {
              const int bot_a = eq[static_cast<std::size_t>(3 * el[a] + c)];
              const int top_a = eq[static_cast<std::size_t>(3 * el[a + 3] + c)];
              const int bot_b = eq[static_cast<std::size_t>(3 * el[b] + c)];
              const int top_b = eq[static_cast<std::size_t>(3 * el[b + 3] + c)];
              auto add = [&](int r, int s, double v) {
                if (r >= 0 && s >= 0) trip.emplace_back(r, s, v);
              };
              add(top_a, top_b, h);
              add(bot_a, bot_b, h);
              add(top_a, bot_b, -h);
              add(bot_a, top_b, -h);
            }
          }
      }
    }
    Eigen::SparseMatrix<double> k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
  }

 private:
  static std::array<Eigen::Vector3d, 3> pair_differences(const Eigen::VectorXd& u, const std::array<int, 6>& el) {
    std::array<Eigen::Vector3d, 3> d;
    for (std::size_t a = 0; a < 3; ++a)
      d[a] = u.segment<3>(3 * static_cast<Eigen::Index>(el[a + 3])) - u.segment<3>(3 * static_cast<Eigen::Index>(el[a]));
    return d;
  }

  const MacroMesh& mesh_;
  const MacroProblem& problem_;
  const evaluator::LocalLaw& law_;
  std::vector<ElementGeometry> geom_;
};

struct Constraints {
  std::vector<int> eq;           // reduced equation per dof, kFixed when prescribed
  std::vector<int> top_y;        // driven dofs
  std::vector<int> top_x;
  std::vector<int> bottom;       // every constrained dof of the bottom grip
  std::vector<int> constrained;  // every dof carrying a reaction, the creep master included
  Eigen::Index unknowns = 0;
  int master = -1;               // creep: shared equation of the top y dofs
};

Constraints constrain(const MacroMesh& mesh, bool lateral_free, bool force_driven) {
  const std::size_t ndof = 3 * mesh.node_count();
  Constraints c;
  c.eq.assign(ndof, kFree);
  auto fix = [&](int dof) { c.eq[static_cast<std::size_t>(dof)] = kFixed; };
  for (int n : mesh.bottom) {
    fix(3 * n + 1);
    c.bottom.push_back(3 * n + 1);
    if (!lateral_free) {
      fix(3 * n);
      fix(3 * n + 2);
      c.bottom.push_back(3 * n);
      c.bottom.push_back(3 * n + 2);
    }
  }
  for (int n : mesh.top) {
    fix(3 * n + 1);
    c.top_y.push_back(3 * n + 1);
    c.top_x.push_back(3 * n);
    if (!lateral_free) {
      fix(3 * n);
      fix(3 * n + 2);
    }
  }
  if (lateral_free) {
    fix(3 * mesh.anchor);
    fix(3 * mesh.anchor + 2);
    fix(3 * mesh.anchor_x + 2);
  }
  Eigen::Index next = 0;
  for (std::size_t d = 0; d < ndof; ++d) {
    if (c.eq[d] == kFixed)
      c.constrained.push_back(static_cast<int>(d));
    else
      c.eq[d] = static_cast<int>(next++);
  }
  if (force_driven) {
    c.master = static_cast<int>(next++);
    for (int d : c.top_y) c.eq[static_cast<std::size_t>(d)] = c.master;
  }
  c.unknowns = next;
  return c;
}

struct Reactions {
  Eigen::Vector3d top = Eigen::Vector3d::Zero();
  Eigen::Vector3d total = Eigen::Vector3d::Zero();  // over every constrained dof
  double top_norm = 0.0;
};

Reactions reactions(const MacroMesh& mesh, const Constraints& c, const Eigen::VectorXd& r) {
  Reactions out;
  double sq = 0.0;
  for (int n : mesh.top) {
    for (int k = 0; k < 3; ++k) {
      const double v = r(3 * n + k);
      out.top(k) += v;
      const bool carried = c.eq[static_cast<std::size_t>(3 * n + k)] < 0 || k == 1;
      if (carried) sq += v * v;
    }
  }
  out.top_norm = std::sqrt(sq);
  for (int d : c.constrained) out.total(d % 3) += r(d);
  return out;
}

Eigen::VectorXd reduced_residual(const Constraints& c, const Eigen::VectorXd& r, double master_force) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.unknowns);
  for (std::size_t d = 0; d < c.eq.size(); ++d)
    if (c.eq[d] >= 0) out(c.eq[d]) += r(static_cast<Eigen::Index>(d));
  if (c.master >= 0) out(c.master) -= master_force;
  return out;
}

struct StepOutcome {
  bool ok = false;
  Eigen::VectorXd u;
  std::vector<ElementState> states;
  Eigen::VectorXd force;
  std::size_t iterations = 0;
  std::string why;
};

class Solver {
 public:
  Solver(const MacroMesh& mesh, const MacroProblem& problem, const evaluator::LocalLaw& law, double g_ref)
      : mesh_(mesh),
        problem_(problem),
        constraints_(constrain(mesh, problem.lateral_free, std::holds_alternative<CreepLoading>(problem.loading))),
        assembler_(mesh, problem, law, element_geometry(mesh, problem.solver.hourglass * g_ref)) {}

  const Constraints& constraints() const { return constraints_; }

  std::pair<std::vector<ElementState>, Eigen::VectorXd> initial(const Eigen::VectorXd& u, double dt,
                                                                const std::vector<evaluator::PointHistory>& h) const {
    std::vector<ElementState> states;
    assembler_.evaluate(u, dt, h, states);
    return {std::move(states), assembler_.internal_force(u, states)};
  }

  StepOutcome solve(Eigen::VectorXd u, double dt, const std::vector<evaluator::PointHistory>& history,
                    double master_force) const {
    StepOutcome out;
    const auto& c = constraints_;
    std::vector<ElementState> states;
    Eigen::VectorXd force, r;
    auto assemble = [&](const Eigen::VectorXd& trial, std::vector<ElementState>& s, Eigen::VectorXd& f,
                        Eigen::VectorXd& red) {
      ++out.iterations;
      assembler_.evaluate(trial, dt, history, s);
      f = assembler_.internal_force(trial, s);
      red = reduced_residual(c, f, master_force);
      return red.allFinite();
    };
    try {
      if (!assemble(u, states, force, r)) {
        out.why = "non-finite residual";
        return out;
      }
    } catch (const DomainError& e) {
      out.why = e.what();
      return out;
    } catch (const SolverError& e) {
      out.why = e.what();
      return out;
    }
    for (std::size_t it = 0;; ++it) {
      const Reactions rx = reactions(mesh_, c, force);
      const double scale = std::max(rx.top_norm, std::abs(master_force));
      if (r.norm() <= std::max(problem_.solver.residual_rtol * scale, problem_.solver.residual_atol)) {
        out.ok = true;
        out.u = std::move(u);
        out.states = std::move(states);
        out.force = std::move(force);
        return out;
      }
      if (it + 1 >= problem_.stepping.max_newton) break;
      const Eigen::SparseMatrix<double> k = assembler_.tangent(states, c.eq, c.unknowns);
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(k);
      if (lu.info() != Eigen::Success) {
        out.why = "singular stiffness matrix";
        return out;
      }
      const Eigen::VectorXd dx = lu.solve(-r);
      if (!dx.allFinite()) {
        out.why = "singular stiffness matrix";
        return out;
      }
      double alpha = 1.0;
      for (;;) {
        Eigen::VectorXd trial = u;
        for (std::size_t d = 0; d < c.eq.size(); ++d)
          if (c.eq[d] >= 0) trial(static_cast<Eigen::Index>(d)) += alpha * dx(c.eq[d]);
        std::vector<ElementState> ts;
        Eigen::VectorXd tf, tr;
        bool admissible = false;
        try {
          admissible = assemble(trial, ts, tf, tr);
        } catch (const DomainError&) {
        } catch (const SolverError&) {
        }
        if (admissible && (tr.norm() <= (1.0 - 1e-4 * alpha) * r.norm() || alpha < 1.0 / 16.0)) {
          u = std::move(trial);
          states = std::move(ts);
          force = std::move(tf);
          r = std::move(tr);
          break;
        }
        if (alpha < 1.0 / 16.0) {
          out.why = "line search left the admissible region";
          return out;
        }
        alpha *= 0.5;
      }
    }
    out.why = "Newton did not converge in " + std::to_string(problem_.stepping.max_newton) + " iterations";
    return out;
  }

 private:
  const MacroMesh& mesh_;
  const MacroProblem& problem_;
  Constraints constraints_;
  Assembler assembler_;
};

FieldFrame make_frame(const MacroMesh& mesh, const Constraints& c, const CouponSpec& spec, double time, double dt,
                      double applied, const Eigen::VectorXd& u, const Eigen::VectorXd& force,
                      const std::vector<ElementState>& states, bool keep) {
  FieldFrame fr;
  fr.time = time;
  fr.dt = dt;
  fr.applied = applied;
  double uy = 0.0;
  for (int d : c.top_y) uy += u(d);
  fr.eps_yy = uy / static_cast<double>(c.top_y.size()) / spec.length;
  const Reactions rx = reactions(mesh, c, force);
  fr.sig_yy = rx.top(1) / spec.area();
  fr.sig_xy = rx.top(0) / spec.area();
  fr.reaction_imbalance = rx.top_norm > 0.0 ? rx.total.norm() / rx.top_norm : rx.total.norm();
  if (keep) {
    fr.elements.resize(states.size());
    for (std::size_t e = 0; e < states.size(); ++e) {
      auto& ef = fr.elements[e];
      ef.f = states[e].f;
      ef.sigma = states[e].point.stress;
      ef.p = states[e].p;
      ef.phi_deg = states[e].point.reorientation_deg;
    }
  }
  return fr;
}

double grip_work(const Constraints& c, const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                 const Eigen::VectorXd& r0, const Eigen::VectorXd& r1) {
  double w = 0.0;
  auto add = [&](int d) { w += 0.5 * (r0(d) + r1(d)) * (u1(d) - u0(d)); };
  for (int d : c.constrained) add(d);
  return w;
}

}  // namespace

std::vector<double> FieldFrame::eps_yy_field() const {
  std::vector<double> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.f(1, 1) - 1.0);
  return out;
}

std::vector<double> FieldFrame::phi_field() const {
  std::vector<double> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.phi_deg);
  return out;
}

MacroResult run(const MacroMesh& mesh, const MacroProblem& problem, const evaluator::LocalLaw& law) {
  problem.coupon.validate();
  stepping::StepController ctl(problem.stepping);
  const bool creep = std::holds_alternative<CreepLoading>(problem.loading);

  double end = 0.0, rate = 0.0;
  pathgen::CreepProtocol creep_protocol{};
  if (creep) {
    const auto& cl = std::get<CreepLoading>(problem.loading);
    creep_protocol = pathgen::creep_path(cl.protocol.target, cl.protocol.rate, cl.protocol.hold);
    end = creep_protocol.total_duration();
  } else {
    const auto& csr = std::get<CsrLoading>(problem.loading);
    if (!(csr.strain_rate >= 0.0)) throw ConfigError("strain rate must be non-negative");
    rate = csr.strain_rate;
    if (rate > 0.0) {
      if (!(csr.target_strain > 0.0)) throw ConfigError("target strain must be positive");
      end = csr.target_strain / rate;
    } else {
      if (!(csr.duration > 0.0)) throw ConfigError("a zero strain rate needs a positive duration");
      end = csr.duration;
    }
  }

  const double g_ref =
      evaluator::initial_global_stiffness(law, problem.coupon.angle, problem.stepping.dt0)(3, 3);
  const Solver solver(mesh, problem, law, g_ref);
  const auto& c = solver.constraints();
  const double length = problem.coupon.length, area = problem.coupon.area();
  const double slope = tab_slope(problem.coupon);

  const std::size_t ndof = 3 * mesh.node_count();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  Eigen::VectorXd du_prev = Eigen::VectorXd::Zero(u.size());
  std::vector<evaluator::PointHistory> history(mesh.element_count(), law.fresh());

  MacroResult result;
  auto [states0, force] = solver.initial(u, problem.stepping.dt0, history);
  result.frames.push_back(make_frame(mesh, c, problem.coupon, 0.0, 0.0, 0.0, u, force, states0,
                                     problem.solver.keep_fields));

  double t = 0.0, applied = 0.0, prev_increment = 0.0, prev_dt = 0.0;
  const double slack = 1e-12 * std::max(1.0, end);
  while (end - t > slack) {
    const double dt = ctl.propose(t, end);
    const double next = creep ? creep_protocol.next_stress(applied, dt) : rate * (t + dt);

    Eigen::VectorXd guess = u;
    double master_force = 0.0;
    if (creep) {
      master_force = next * area;
      if (prev_dt > 0.0) guess += du_prev * std::min(1.0, dt / prev_dt);
    } else {
      const double increment = (next - applied) * length;
      if (prev_increment != 0.0) {
        guess += du_prev * (increment / prev_increment);
      } else {
        for (std::size_t n = 0; n < mesh.node_count(); ++n) {
          const auto& x = mesh.nodes[n];
          const double frac = (x.y() - slope * (x.x() - 0.5 * problem.coupon.width)) / length;
          guess(static_cast<Eigen::Index>(3 * n + 1)) += increment * frac;
        }
      }
      for (int d : c.top_y) guess(d) = next * length;
    }

    StepOutcome o = solver.solve(guess, dt, history, master_force);
    if (!o.ok) {
      if (!ctl.rejected(dt)) {
        result.completed = false;
        result.message = "stopped at t = " + std::to_string(t) + " s: " + o.why;
        break;
      }
      continue;
    }
    ctl.accepted();
    auto fr = make_frame(mesh, c, problem.coupon, t + dt, dt, next, o.u, o.force, o.states,
                         problem.solver.keep_fields);
    fr.iterations = o.iterations;
    fr.work_increment = grip_work(c, u, o.u, force, o.force);
    result.frames.push_back(std::move(fr));

    du_prev = o.u - u;
    prev_increment = (next - applied) * length;
    prev_dt = dt;
    t += dt;
    applied = next;
    u = std::move(o.u);
    force = std::move(o.force);
    for (std::size_t e = 0; e < history.size(); ++e) history[e] = std::move(o.states[e].point.history);
  }
  result.cuts = ctl.total_cuts();
  return result;
}

MacroResult run(const MacroProblem& problem, const evaluator::LocalLaw& law) {
  return run(build_mesh(problem.coupon), problem, law);
}

std::vector<FieldStatistics> field_statistics(const MacroResult& result) {
  std::vector<FieldStatistics> out;
  for (const auto& fr : result.frames) {
    if (fr.elements.empty()) continue;
    FieldStatistics s;
    s.time = fr.time;
    s.eps_yy = fr.eps_yy;
    const auto eps = fr.eps_yy_field();
    const auto phi = fr.phi_field();
    const auto n = static_cast<double>(eps.size());
    auto [emin, emax] = std::minmax_element(eps.begin(), eps.end());
    auto [pmin, pmax] = std::minmax_element(phi.begin(), phi.end());
    s.eps_min = *emin;
    s.eps_max = *emax;
    s.phi_min = *pmin;
    s.phi_max = *pmax;
    double es = 0.0, ps = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      es += eps[i];
      ps += phi[i];
    }
    s.eps_mean = es / n;
    s.phi_mean = ps / n;
    double var = 0.0;
    for (double v : eps) var += (v - s.eps_mean) * (v - s.eps_mean);
    const double sd = std::sqrt(var / n);
    s.eps_cov = s.eps_mean != 0.0 ? sd / std::abs(s.eps_mean) : 0.0;
    // Round-off in a uniform field should not leak into the envelope.
    if (s.eps_max - s.eps_min <= 1e-14 * std::max(1.0, std::abs(s.eps_mean))) s.eps_min = s.eps_max = s.eps_mean;
    out.push_back(s);
  }
  return out;
}

FieldStatistics statistics_at(const MacroResult& result, Alignment alignment, double value) {
  const auto stats = field_statistics(result);
  auto key = [&](const FieldStatistics& s) { return alignment == Alignment::Strain ? s.eps_yy : s.time; };
  if (!stats.empty()) {
    // Snap round-off at the ends of the series.
    const double lo = std::min(key(stats.front()), key(stats.back()));
    const double hi = std::max(key(stats.front()), key(stats.back()));
    const double slack = 1e-9 * std::max(std::abs(lo), std::abs(hi));
    if (value < lo && value >= lo - slack) value = lo;
    if (value > hi && value <= hi + slack) value = hi;
  }
  for (std::size_t i = 0; i + 1 < stats.size(); ++i) {
    const double a = key(stats[i]), b = key(stats[i + 1]);
    if (value < std::min(a, b) || value > std::max(a, b)) continue;
    if (a == b) return stats[i];
    const double w = (value - a) / (b - a);
    auto lerp = [w](double x, double y) { return x + w * (y - x); };
    const auto& p = stats[i];
    const auto& q = stats[i + 1];
    FieldStatistics s;
    s.time = lerp(p.time, q.time);
    s.eps_yy = lerp(p.eps_yy, q.eps_yy);
    s.phi_mean = lerp(p.phi_mean, q.phi_mean);
    s.phi_min = lerp(p.phi_min, q.phi_min);
    s.phi_max = lerp(p.phi_max, q.phi_max);
    s.eps_mean = lerp(p.eps_mean, q.eps_mean);
    s.eps_min = lerp(p.eps_min, q.eps_min);
    s.eps_max = lerp(p.eps_max, q.eps_max);
    s.eps_cov = lerp(p.eps_cov, q.eps_cov);
    return s;
  }
  if (stats.size() == 1 && key(stats[0]) == value) return stats[0];
  throw DomainError("requested value lies outside the recorded frames");
}

double oblique_angle(const Matrix6& s) {
  if (!s.allFinite()) throw DomainError("compliance must be finite");
  if (!(s(1, 1) > 0.0)) throw DomainError("compliance S_yy,yy must be positive");
  return std::atan2(1.0, -s(1, 3) / s(1, 1)) * 180.0 / std::numbers::pi;
}

double oblique_angle_for(const evaluator::LocalLaw& law, kinematics::OffAxisAngle angle, double dt) {
  return oblique_angle(evaluator::initial_global_stiffness(law, angle, dt).inverse());
}

}  // namespace offaxis::macro
