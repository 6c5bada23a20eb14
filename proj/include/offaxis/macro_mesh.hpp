// SPDX-License-Identifier: Apache-2.0
//
// Structured coupon gauge section: x across the width, y along the load,
// z through the thickness. Every quad cell is split into two linear wedges.
#pragma once

#include "offaxis/kinematics.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

namespace offaxis::macro {

enum class EndTab { Straight, Oblique };

struct CouponSpec {
  double length = 120.0;     // gauge length L0, mm
  double width = 20.0;       // mm
  double thickness = 1.0;    // mm
  kinematics::OffAxisAngle angle{15.0};
  EndTab tab = EndTab::Straight;
  double oblique_deg = 90.0;  // tab line angle from the y axis, (0, 180)
  std::size_t nx = 6;         // divisions across the width
  std::size_t ny = 48;        // along the length
  std::size_t nz = 1;         // through the thickness

  /// Throws ConfigError for non-positive dimensions, zero divisions or an
  /// oblique angle outside (0, 180).
  void validate() const;
  double area() const { return width * thickness; }
};

struct MacroMesh {
  std::vector<Eigen::Vector3d> nodes;
  std::vector<std::array<int, 6>> elements;  // bottom triangle then top triangle (z)
  std::vector<int> bottom;                   // nodes gripped at y = 0
  std::vector<int> top;                      // nodes gripped at y = L0
  int anchor = 0;                            // bottom corner at x = 0, z = 0
  int anchor_x = 0;                          // bottom corner at x = W, z = 0

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }
  Eigen::Vector3d centroid(std::size_t e) const;
};

/// Shear offset of the tab lines: y' = y + cot(beta) (x - W/2), exactly zero at 90.
double tab_slope(const CouponSpec& spec);

/// Throws DomainError when an element has a non-positive Jacobian.
MacroMesh build_mesh(const CouponSpec& spec);

}  // namespace offaxis::macro
