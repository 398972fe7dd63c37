#pragma once

#include <Eigen/Dense>
#include <array>

namespace shellbench {

// Orthonormal element frame; i3 = i1 x i2.
struct LocalFrame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d i1 = Eigen::Vector3d::UnitX();
  Eigen::Vector3d i2 = Eigen::Vector3d::UnitY();
  Eigen::Vector3d i3 = Eigen::Vector3d::UnitZ();
};

// Orthonormal tangent pair and unit normal at a mesh node; (g1, g2, n) is
// right-handed.
struct NodalFrame {
  Eigen::Vector3d g1, g2, n;
};

// Straightened (plane) element: corner coordinates in the local frame, the
// alternating warp offsets +d,-d,+d,-d along i3, and the bilinear reference
// map data. h_k is the element diameter (longest diagonal).
struct ElementGeometry {
  LocalFrame frame;
  Eigen::Matrix<double, 4, 2> planar;  // counter-clockwise corners, centroid origin
  double warp = 0.0;
  double h_k = 0.0;

  Eigen::Matrix2d jacobian(double xi, double eta) const;
  Eigen::Matrix2d jacobian_mid() const { return jacobian(0.0, 0.0); }
};

// Second-fundamental-form coefficients at one reference point (b12 symmetrized).
struct Curvature {
  double b11 = 0.0;
  double b22 = 0.0;
  double b12 = 0.0;
};

// Bilinear shape functions on [-1,1]^2; node order (-,-), (+,-), (+,+), (-,+).
Eigen::Vector4d shape_values(double xi, double eta);
Eigen::Matrix<double, 4, 2> shape_gradients(double xi, double eta);

// Plane element via the centroid / diagonal-cross-product construction; the
// four corner offsets along i3 come out as exactly alternating +-d. i1 is the
// in-plane projection of the first edge. Throws GeometryError on degenerate
// input.
ElementGeometry straighten_element(const std::array<Eigen::Vector3d, 4>& corners);

// b_ab = -i_a . dn_h/dx_b with n_h the bilinear interpolant of the nodal
// normals; evaluated at reference point (xi, eta).
Curvature curvature_coefficients(const ElementGeometry& geom,
                                 const std::array<Eigen::Vector3d, 4>& nodal_normals,
                                 double xi, double eta);

// Block-diagonal map (2x2 for u, 1 for w, 2x2 for theta) taking nodal-frame
// degrees of freedom to element-frame ones.
Eigen::Matrix<double, 5, 5> nodal_dof_transform(const LocalFrame& frame,
                                                const NodalFrame& nodal);

}  // namespace shellbench
