#include "shellbench/geometry.hpp"

#include <cmath>

#include "shellbench/errors.hpp"

namespace shellbench {

Eigen::Vector4d shape_values(double xi, double eta) {
  return 0.25 * Eigen::Vector4d((1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                                (1 + xi) * (1 + eta), (1 - xi) * (1 + eta));
}

Eigen::Matrix<double, 4, 2> shape_gradients(double xi, double eta) {
  Eigen::Matrix<double, 4, 2> g;
  g << -(1 - eta), -(1 - xi),   //
      (1 - eta), -(1 + xi),     //
      (1 + eta), (1 + xi),      //
      -(1 + eta), (1 - xi);
  return 0.25 * g;
}

Eigen::Matrix2d ElementGeometry::jacobian(double xi, double eta) const {
  return planar.transpose() * shape_gradients(xi, eta);
}

ElementGeometry straighten_element(const std::array<Eigen::Vector3d, 4>& corners) {
  ElementGeometry geom;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : corners) centroid += 0.25 * p;

  const Eigen::Vector3d d1 = corners[2] - corners[0];
  const Eigen::Vector3d d2 = corners[3] - corners[1];
  const Eigen::Vector3d cross = d1.cross(d2);
  const double cross_norm = cross.norm();
  const double scale = std::max(d1.norm(), d2.norm());
  if (!(cross_norm > 1e-12 * scale * scale)) {
    throw GeometryError("degenerate element: diagonals are parallel or zero");
  }

  geom.frame.origin = centroid;
  geom.frame.i3 = cross / cross_norm;
  Eigen::Vector3d edge = corners[1] - corners[0];
  edge -= edge.dot(geom.frame.i3) * geom.frame.i3;
  if (!(edge.norm() > 1e-14 * scale)) {
    throw GeometryError("degenerate element: first edge is normal to the element plane");
  }
  geom.frame.i1 = edge.normalized();
  geom.frame.i2 = geom.frame.i3.cross(geom.frame.i1);

  // With this plane choice the centroid offsets alternate exactly: +d,-d,+d,-d.
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector3d d = corners[k] - centroid;
    geom.planar(k, 0) = d.dot(geom.frame.i1);
    geom.planar(k, 1) = d.dot(geom.frame.i2);
  }
  geom.warp = std::abs((corners[0] - centroid).dot(geom.frame.i3));
  geom.h_k = std::max(d1.norm(), d2.norm());
  return geom;
}

Curvature curvature_coefficients(const ElementGeometry& geom,
                                 const std::array<Eigen::Vector3d, 4>& nodal_normals,
                                 double xi, double eta) {
  const Eigen::Matrix2d jac = geom.jacobian(xi, eta);
  const double det = jac.determinant();
  if (!(det > 0.0)) throw GeometryError("singular Jacobian in curvature evaluation");
  const Eigen::Matrix<double, 4, 2> dn_dx = shape_gradients(xi, eta) * jac.inverse();

  Eigen::Matrix<double, 3, 2> normal_gradient = Eigen::Matrix<double, 3, 2>::Zero();
  for (int k = 0; k < 4; ++k) {
    normal_gradient.col(0) += dn_dx(k, 0) * nodal_normals[k];
    normal_gradient.col(1) += dn_dx(k, 1) * nodal_normals[k];
  }

  Curvature b;
  b.b11 = -geom.frame.i1.dot(normal_gradient.col(0));
  b.b22 = -geom.frame.i2.dot(normal_gradient.col(1));
  b.b12 = -0.5 * (geom.frame.i1.dot(normal_gradient.col(1)) +
                  geom.frame.i2.dot(normal_gradient.col(0)));
  return b;
}

Eigen::Matrix<double, 5, 5> nodal_dof_transform(const LocalFrame& frame,
                                                const NodalFrame& nodal) {
  Eigen::Matrix2d tangent;
  tangent << nodal.g1.dot(frame.i1), nodal.g2.dot(frame.i1),  //
      nodal.g1.dot(frame.i2), nodal.g2.dot(frame.i2);
  Eigen::Matrix<double, 5, 5> t = Eigen::Matrix<double, 5, 5>::Zero();
  t.block<2, 2>(0, 0) = tangent;
  t(2, 2) = 1.0;
  t.block<2, 2>(3, 3) = tangent;
  return t;
}

}  // namespace shellbench
