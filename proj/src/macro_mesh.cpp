// SPDX-License-Identifier: Apache-2.0
#include "offaxis/macro_mesh.hpp"

#include "offaxis/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace offaxis::macro {

void CouponSpec::validate() const {
  if (!(length > 0.0 && width > 0.0 && thickness > 0.0)) throw ConfigError("coupon dimensions must be positive");
  if (nx == 0 || ny == 0 || nz == 0) throw ConfigError("coupon mesh divisions must be positive");
  if (tab == EndTab::Oblique && !(oblique_deg > 0.0 && oblique_deg < 180.0))
    throw ConfigError("oblique tab angle must lie in (0, 180) degrees");
}

double tab_slope(const CouponSpec& spec) {
  if (spec.tab == EndTab::Straight || spec.oblique_deg == 90.0) return 0.0;
  const double b = spec.oblique_deg * std::numbers::pi / 180.0;
  return std::cos(b) / std::sin(b);
}

Eigen::Vector3d MacroMesh::centroid(std::size_t e) const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int n : elements[e]) c += nodes[static_cast<std::size_t>(n)];
  return c / 6.0;
}

MacroMesh build_mesh(const CouponSpec& spec) {
  spec.validate();
  const double slope = tab_slope(spec);
  const std::size_t nx = spec.nx, ny = spec.ny, nz = spec.nz;
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) {
    return static_cast<int>(k * (nx + 1) * (ny + 1) + j * (nx + 1) + i);
  };

  MacroMesh mesh;
  mesh.nodes.resize((nx + 1) * (ny + 1) * (nz + 1));
  for (std::size_t k = 0; k <= nz; ++k)
    for (std::size_t j = 0; j <= ny; ++j)
      for (std::size_t i = 0; i <= nx; ++i) {
        const double x = spec.width * static_cast<double>(i) / static_cast<double>(nx);
        double y = spec.length * static_cast<double>(j) / static_cast<double>(ny);
        if (slope != 0.0) y += slope * (x - 0.5 * spec.width);
        const double z = spec.thickness * static_cast<double>(k) / static_cast<double>(nz);
        mesh.nodes[static_cast<std::size_t>(id(i, j, k))] = {x, y, z};
      }

  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const int a = id(i, j, k), b = id(i + 1, j, k), c = id(i + 1, j + 1, k), d = id(i, j + 1, k);
        const int up = static_cast<int>((nx + 1) * (ny + 1));
        // Alternate the diagonal so the triangulation has no preferred direction.
        std::array<std::array<int, 3>, 2> tris;
        if ((i + j) % 2 == 0)
          tris = {{{a, b, c}, {a, c, d}}};
        else
          tris = {{{a, b, d}, {b, c, d}}};
        for (const auto& t : tris)
          mesh.elements.push_back({t[0], t[1], t[2], t[0] + up, t[1] + up, t[2] + up});
      }

  for (std::size_t k = 0; k <= nz; ++k)
    for (std::size_t i = 0; i <= nx; ++i) {
      mesh.bottom.push_back(id(i, 0, k));
      mesh.top.push_back(id(i, ny, k));
    }
  mesh.anchor = id(0, 0, 0);
  mesh.anchor_x = id(nx, 0, 0);

  // Reference Jacobian at the wedge centroid.
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    const Eigen::Vector3d& p0 = mesh.nodes[static_cast<std::size_t>(el[0])];
    const Eigen::Vector3d& p1 = mesh.nodes[static_cast<std::size_t>(el[1])];
    const Eigen::Vector3d& p2 = mesh.nodes[static_cast<std::size_t>(el[2])];
    const Eigen::Vector3d& p3 = mesh.nodes[static_cast<std::size_t>(el[3])];
    Eigen::Matrix3d j;
    j.col(0) = p1 - p0;
    j.col(1) = p2 - p0;
    j.col(2) = p3 - p0;
    if (!(j.determinant() > 1e-12 * spec.area() * spec.length / static_cast<double>(nx * ny * nz)))
      throw DomainError("degenerate wedge element " + std::to_string(e));
  }
  return mesh;
}

}  // namespace offaxis::macro
