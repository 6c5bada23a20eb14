// SPDX-License-Identifier: Apache-2.0
#include "offaxis/errors.hpp"
#include "offaxis/kinematics.hpp"
#include "offaxis/micromodel.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace offaxis::micromodel {

namespace {

constexpr int kPointsPerCell = 8;

const std::array<std::array<int, 3>, 8> kCorners{
    {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Realized fiber area fraction for graded widths.
double area_fraction(const std::vector<bool>& fiber_yz, const std::vector<double>& wy,
                     const std::vector<double>& wz) {
  const int n = static_cast<int>(wy.size());
  double a = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      if (fiber_yz[j + n * k]) a += wy[j] * wz[k];
  return a;
}

std::vector<double> graded_widths(const std::vector<bool>& crossing, double c) {
  std::vector<double> w(crossing.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = crossing[i] ? 1.0 + c : 1.0;
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

struct CellGeometry {
  std::array<int, 8> nodes;
  Vector3 size;
};

CellGeometry cell_geometry(const RveMesh& mesh, int i, int j, int k) {
  const int n = mesh.n;
  CellGeometry g;
  const std::array<int, 3> base{i, j, k};
  for (int a = 0; a < 8; ++a) {
    std::array<int, 3> idx;
    for (int d = 0; d < 3; ++d) idx[d] = base[d] + kCorners[a][d];
    g.nodes[a] = wrap(idx[0], n) + n * (wrap(idx[1], n) + n * wrap(idx[2], n));
  }
  for (int d = 0; d < 3; ++d) g.size(d) = mesh.widths[d][base[d]];
  return g;
}

// Shape function gradients w.r.t. X at Gauss point q of an axis-aligned box.
std::array<Vector3, 8> shape_gradients(const Vector3& size, int q) {
  const double g = 1.0 / std::sqrt(3.0);
  const Vector3 xi(kCorners[q][0] ? g : -g, kCorners[q][1] ? g : -g, kCorners[q][2] ? g : -g);
  std::array<Vector3, 8> out;
  for (int a = 0; a < 8; ++a) {
    const Vector3 s(kCorners[a][0] ? 1.0 : -1.0, kCorners[a][1] ? 1.0 : -1.0, kCorners[a][2] ? 1.0 : -1.0);
    const Vector3 f = (Vector3::Ones() + xi.cwiseProduct(s)) / 2.0;
    out[a] = Vector3(s(0) * f(1) * f(2) / size(0), f(0) * s(1) * f(2) / size(1),
                     f(0) * f(1) * s(2) / size(2));
  }
  return out;
}

struct Assembly {
  Eigen::VectorXd residual;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Tensor2> stresses;
  std::vector<double> weights;
  std::vector<double> jacobians;
  std::vector<MaterialState> states;
  double force_scale = 0.0;
};

}  // namespace

RveMesh RveMesh::homogeneous(int n, Phase p) {
  if (n < 1) throw DomainError("RVE needs at least one cell per direction");
  RveMesh mesh;
  mesh.n = n;
  for (auto& w : mesh.widths) w.assign(n, 1.0 / n);
  mesh.phase.assign(static_cast<std::size_t>(n) * n * n, p);
  mesh.target_fraction = p == Phase::Fiber ? 1.0 : 0.0;
  return mesh;
}

RveMesh RveMesh::build(int n, double vf, std::array<int, 2> offset) {
  if (n < 2) throw DomainError("RVE with a fiber needs n >= 2");
  if (!(vf > 0.0 && vf < 1.0)) throw DomainError("fiber volume fraction must lie in (0, 1)");

  // Candidate fiber sections: cells of the (y, z) section whose centers lie
  // inside a circle, one candidate per distinct center distance. The one whose
  // uniform-grid fraction is closest to vf is tried first; grading the rows
  // and columns that cross the fiber then hits vf exactly.
  std::vector<double> radii;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double dy = j + 0.5 - n / 2.0, dz = k + 0.5 - n / 2.0;
      radii.push_back(dy * dy + dz * dz);
    }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  auto cells_within = [&](double r2) {
    std::vector<bool> in(static_cast<std::size_t>(n) * n, false);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        const double dy = j + 0.5 - n / 2.0, dz = k + 0.5 - n / 2.0;
        in[j + n * k] = dy * dy + dz * dz <= r2;
      }
    return in;
  };
  const double cells = static_cast<double>(n) * n;
  auto count_within = [&](double r2) {
    const auto in = cells_within(r2);
    return static_cast<double>(std::count(in.begin(), in.end(), true));
  };
  std::stable_sort(radii.begin(), radii.end(), [&](double a, double b) {
    return std::abs(count_within(a) / cells - vf) < std::abs(count_within(b) / cells - vf);
  });

  std::vector<bool> fiber_yz, crossing;
  double lo = -0.999, hi = 1e3;
  auto fraction_at = [&](double c) {
    const auto w = graded_widths(crossing, c);
    return area_fraction(fiber_yz, w, w);
  };
  bool found = false;
  for (double r2 : radii) {
    fiber_yz = cells_within(r2);
    if (count_within(r2) == cells) continue;
    crossing.assign(n, false);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        if (fiber_yz[j + n * k]) crossing[j] = crossing[k] = true;
    if (fraction_at(lo) <= vf && fraction_at(hi) >= vf) {
      found = true;
      break;
    }
  }
  if (!found) throw DomainError("fiber volume fraction not reachable on an n = " + std::to_string(n) + " grid");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fraction_at(mid) < vf ? lo : hi) = mid;
  }
  const auto w = graded_widths(crossing, 0.5 * (lo + hi));

  RveMesh mesh;
  mesh.n = n;
  mesh.target_fraction = vf;
  mesh.widths[0].assign(n, 1.0 / n);
  mesh.widths[1].resize(n);
  mesh.widths[2].resize(n);
  for (int j = 0; j < n; ++j) {
    mesh.widths[1][wrap(j + offset[0], n)] = w[j];
    mesh.widths[2][wrap(j + offset[1], n)] = w[j];
  }
  mesh.phase.resize(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        mesh.phase[mesh.cell_index(i, wrap(j + offset[0], n), wrap(k + offset[1], n))] =
            fiber_yz[j + n * k] ? Phase::Fiber : Phase::Matrix;
  return mesh;
}

double RveMesh::fiber_fraction() const {
  double v = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (phase[cell_index(i, j, k)] == Phase::Fiber) v += widths[0][i] * widths[1][j] * widths[2][k];
  return v;
}

RveState RveState::fresh(const RveMesh& mesh, const RveMaterials& materials) {
  RveState s;
  s.fluctuation = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(mesh.cell_count()));
  s.points.reserve(mesh.cell_count() * kPointsPerCell);
  for (std::size_t c = 0; c < mesh.cell_count(); ++c)
    for (int q = 0; q < kPointsPerCell; ++q)
      s.points.push_back(mesh.phase[c] == Phase::Fiber ? MaterialState::empty()
                                                       : MaterialState::fresh(materials.matrix));
  return s;
}

namespace {

Assembly assemble(const RveMesh& mesh, const RveMaterials& materials, const Tensor2& f_target,
                  double dt, const RveState& state, const Eigen::VectorXd& w, bool with_tangent) {
  const int n = mesh.n;
  Assembly out;
  out.residual = Eigen::VectorXd::Zero(w.size());
  const std::size_t points = mesh.cell_count() * kPointsPerCell;
  out.stresses.reserve(points);
  out.weights.reserve(points);
  out.jacobians.reserve(points);
  out.states.reserve(points);
  if (with_tangent) out.triplets.reserve(mesh.cell_count() * kPointsPerCell * 576);

  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t cell = mesh.cell_index(i, j, k);
        const CellGeometry geo = cell_geometry(mesh, i, j, k);
        const ModelProperties props = mesh.phase[cell] == Phase::Fiber
                                          ? ModelProperties(materials.fiber)
                                          : ModelProperties(materials.matrix);
        std::array<Vector3, 8> fluct;
        for (int a = 0; a < 8; ++a) fluct[a] = w.segment<3>(3 * geo.nodes[a]);
        const double weight = geo.size.prod() / 8.0;

        for (int q = 0; q < kPointsPerCell; ++q) {
          const auto grad = shape_gradients(geo.size, q);
          // F = F_target + grad(w): the affine part is exact, not reassembled.
          Tensor2 f = f_target;
          for (int a = 0; a < 8; ++a) f += fluct[a] * grad[a].transpose();
          const double jac = f.determinant();
          if (!(jac > 0.0)) throw DomainError("RVE element inverted (det F <= 0)");

          const MaterialState& previous = state.points[cell * kPointsPerCell + q];
          auto r = constitutive::update(props, f, dt, previous);
          const Tensor2 p = kinematics::nominal_stress(r.stress, f);
          for (int a = 0; a < 8; ++a)
            out.residual.segment<3>(3 * geo.nodes[a]) += weight * p * grad[a];
          out.force_scale += weight * max_abs(p);

          if (with_tangent) {
            const Matrix9 ds = constitutive::stress_gradient(props, f, dt, previous);
            const Matrix9 dp = kinematics::nominal_stress_tangent(r.stress, f, ds);
            for (int a = 0; a < 8; ++a) {
              for (int b = 0; b < 8; ++b) {
                for (int ii = 0; ii < 3; ++ii) {
                  for (int kk = 0; kk < 3; ++kk) {
                    double v = 0.0;
                    for (int jj = 0; jj < 3; ++jj)
                      for (int ll = 0; ll < 3; ++ll)
                        v += grad[a](jj) * dp(3 * ii + jj, 3 * kk + ll) * grad[b](ll);
                    out.triplets.emplace_back(3 * geo.nodes[a] + ii, 3 * geo.nodes[b] + kk, weight * v);
                  }
                }
              }
            }
          }
          out.stresses.push_back(r.stress);
          out.weights.push_back(weight);
          out.jacobians.push_back(jac);
          out.states.push_back(std::move(r.state));
        }
      }
    }
  }
  return out;
}

}  // namespace

RveResult rve_solve_step(const RveMesh& mesh, const RveMaterials& materials, const Tensor2& f_target,
                         double dt, const RveState& state, const RveSettings& settings) {
  const double det = f_target.determinant();
  if (!(det > 0.0)) throw DomainError("RVE target deformation needs det F > 0");
  if (state.points.size() != mesh.cell_count() * kPointsPerCell ||
      state.fluctuation.size() != 3 * static_cast<Eigen::Index>(mesh.cell_count()))
    throw ContractViolation("RVE state does not match the mesh");

  // Node 0 is held fixed; its three rows and columns are dropped.
  const Eigen::Index dofs = state.fluctuation.size();
  const Eigen::Index free_dofs = dofs - 3;
  Eigen::VectorXd w = state.fluctuation;

  RveResult out;
  double first = -1.0;
  for (int it = 0; it <= settings.max_iterations; ++it) {
    Assembly a = assemble(mesh, materials, f_target, dt, state, w, false);
    const double norm = a.residual.tail(free_dofs).norm();
    if (first < 0.0) first = norm;
    out.residual = norm;
    if (norm <= std::max(settings.relative_tolerance * first, settings.absolute_tolerance * a.force_scale)) {
      out.stress = homogenize(a.stresses, a.weights, a.jacobians);
      out.state.fluctuation = w;
      out.state.points = std::move(a.states);
      out.iterations = it;
      return out;
    }
    if (it == settings.max_iterations) break;

    a = assemble(mesh, materials, f_target, dt, state, w, true);
    Eigen::SparseMatrix<double> k(free_dofs, free_dofs);
    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(a.triplets.size());
    for (const auto& t : a.triplets)
      if (t.row() >= 3 && t.col() >= 3) reduced.emplace_back(t.row() - 3, t.col() - 3, t.value());
    k.setFromTriplets(reduced.begin(), reduced.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(k);
    if (solver.info() != Eigen::Success)
      throw SolverError("RVE stiffness factorization failed", norm, it);
    const Eigen::VectorXd delta = solver.solve(-a.residual.tail(free_dofs));
    if (!delta.allFinite()) throw SolverError("RVE Newton update is not finite", norm, it);
    w.tail(free_dofs) += delta;
  }
  throw SolverError("RVE Newton did not converge in " + std::to_string(settings.max_iterations) +
                        " iterations",
                    out.residual, settings.max_iterations);
}

std::vector<Tensor2> rve_evaluate(const RveMesh& mesh, const RveMaterials& materials,
                                  const pathgen::LoadPath& path, const RveSettings& settings) {
  std::vector<Tensor2> out;
  out.reserve(path.size());
  RveState state = RveState::fresh(mesh, materials);
  for (std::size_t step = 0; step < path.size(); ++step) {
    try {
      auto r = rve_solve_step(mesh, materials, path.steps[step].stretch, path.steps[step].dt, state, settings);
      out.push_back(r.stress);
      state = std::move(r.state);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(step) + ": " + e.what(), e.residual(), static_cast<int>(step));
    } catch (const DomainError& e) {
      throw SolverError("step " + std::to_string(step) + ": " + e.what(), 0.0, static_cast<int>(step));
    }
  }
  return out;
}

}  // namespace offaxis::micromodel
