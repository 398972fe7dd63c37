#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>

#include "shellbench/geometry.hpp"

namespace shellbench {

struct Material {
  double youngs_modulus = 0.0;  // Pa
  double poisson_ratio = 0.0;
  double thickness = 0.0;  // m
  double shear_modulus() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
};

enum class Reduction { none, shear, shear_and_membrane };

// Element formulation: which covariant strain reductions are applied and the
// optional shear-balancing stabilization parameter (independent of t and h).
struct Formulation {
  Reduction reduction = Reduction::none;
  std::optional<double> stabilization;

  static Formulation disp4() { return {Reduction::none, std::nullopt}; }
  static Formulation mitc4c() { return {Reduction::shear, std::nullopt}; }
  static Formulation mitc4s() { return {Reduction::shear_and_membrane, std::nullopt}; }
  Formulation stabilized(double alpha) const { return {reduction, alpha}; }
  std::string name() const;
};

// Strain-displacement rows at one reference point. Degree-of-freedom order is
// node-major: (u1, u2, w, theta1, theta2) per node, element corner order.
struct StrainOperators {
  Eigen::Matrix<double, 3, 20> membrane;  // eps11, eps22, eps12
  Eigen::Matrix<double, 3, 20> bending;   // kap11, kap22, kap12
  Eigen::Matrix<double, 2, 20> shear;     // gam1, gam2
};

struct ElementMatrices {
  Eigen::Matrix<double, 20, 20> stiffness;
  Eigen::Matrix<double, 20, 1> load = Eigen::Matrix<double, 20, 1>::Zero();
};

inline constexpr double kGaussPoint = 0.57735026918962576451;  // 1/sqrt(3)

// 2x2 Gauss points in the reference square, unit weights.
inline constexpr std::array<std::array<double, 2>, 4> kGauss2x2{
    {{-kGaussPoint, -kGaussPoint},
     {kGaussPoint, -kGaussPoint},
     {kGaussPoint, kGaussPoint},
     {-kGaussPoint, kGaussPoint}}};

// Edge midpoints of the reference square: bottom, right, top, left.
inline constexpr std::array<std::array<double, 2>, 4> kEdgeMidpoints{
    {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}}};

// Shear projection sample points: two Gauss points per edge, ordered bottom,
// top, left, right (the covariant tangential component is quadratic along an
// edge on general quads, so the edge-integral dofs need two points).
std::array<std::array<double, 2>, 8> shear_sample_points();

// Membrane projection sample points: two Gauss points per edge (bottom, top,
// left, right) followed by the four interior Gauss points.
std::array<std::array<double, 2>, 12> membrane_sample_points();

StrainOperators strain_operators(const ElementGeometry& geom, const Curvature& curvature,
                                 double xi, double eta);

// Covariant shear reduction: the edge integrals of the tangential covariant
// component determine the reference field (a + b*eta, c + d*xi) which is
// mapped back with J^-T at the evaluation point. Column count is generic so
// the same projector serves B-matrices and plain sampled fields. Samples
// follow shear_sample_points().
template <int Cols>
struct ShearReduction {
  Eigen::Matrix<double, 1, Cols> const1, lin1, const2, lin2;

  static ShearReduction create(const ElementGeometry& geom,
                               const std::array<Eigen::Matrix<double, 2, Cols>, 8>& samples) {
    const auto points = shear_sample_points();
    std::array<Eigen::Matrix<double, 1, Cols>, 4> integral;
    for (int e = 0; e < 4; ++e) {
      const int tangential = (e < 2) ? 0 : 1;  // bottom/top carry s1, left/right s2
      integral[e].setZero();
      for (int q = 0; q < 2; ++q) {
        const int s = 2 * e + q;
        const Eigen::Matrix2d jt = geom.jacobian(points[s][0], points[s][1]).transpose();
        integral[e] += jt.row(tangential) * samples[s];  // unit Gauss weights
      }
    }
    // edge integral of a linear reference field is twice its midpoint value
    ShearReduction r;
    r.const1 = 0.25 * (integral[0] + integral[1]);
    r.lin1 = 0.25 * (integral[1] - integral[0]);
    r.const2 = 0.25 * (integral[2] + integral[3]);
    r.lin2 = 0.25 * (integral[3] - integral[2]);
    return r;
  }

  Eigen::Matrix<double, 2, Cols> evaluate(const ElementGeometry& geom, double xi,
                                          double eta) const {
    Eigen::Matrix<double, 2, Cols> covariant;
    covariant.row(0) = const1 + eta * lin1;
    covariant.row(1) = const2 + xi * lin2;
    return geom.jacobian(xi, eta).transpose().inverse() * covariant;
  }
};

// Voigt (e11, e22, e12) representation of e -> A^T e A.
Eigen::Matrix3d voigt_congruence(const Eigen::Matrix2d& a);

// Covariant membrane reduction with the midpoint Jacobian fixed on both sides
// (keeps constant fields on arbitrary quads). The five degrees of freedom --
// four edge integrals of the tangential normal strain and the area integral
// of the covariant 12 component -- determine (a + b*eta, c, d + e*xi).
// Samples follow membrane_sample_points().
template <int Cols>
struct MembraneReduction {
  Eigen::Matrix<double, 1, Cols> row11_const, row11_lin, row22_const, row22_lin, row12;
  Eigen::Matrix3d push;

  static MembraneReduction create(
      const ElementGeometry& geom,
      const std::array<Eigen::Matrix<double, 3, Cols>, 12>& samples) {
    const Eigen::Matrix2d jbar = geom.jacobian_mid();
    const Eigen::Matrix3d pull = voigt_congruence(jbar);

    std::array<Eigen::Matrix<double, 3, Cols>, 12> hat;
    for (int s = 0; s < 12; ++s) hat[s] = pull * samples[s];

    MembraneReduction r;
    // edge integrals with 2-point Gauss (unit weights)
    const Eigen::Matrix<double, 1, Cols> bottom = hat[0].row(0) + hat[1].row(0);
    const Eigen::Matrix<double, 1, Cols> top = hat[2].row(0) + hat[3].row(0);
    const Eigen::Matrix<double, 1, Cols> left = hat[4].row(1) + hat[5].row(1);
    const Eigen::Matrix<double, 1, Cols> right = hat[6].row(1) + hat[7].row(1);
    r.row11_const = 0.25 * (bottom + top);
    r.row11_lin = 0.25 * (top - bottom);
    r.row22_const = 0.25 * (left + right);
    r.row22_lin = 0.25 * (right - left);
    r.row12 = 0.25 * (hat[8].row(2) + hat[9].row(2) + hat[10].row(2) + hat[11].row(2));
    r.push = voigt_congruence(jbar.inverse());
    return r;
  }

  Eigen::Matrix<double, 3, Cols> evaluate(double xi, double eta) const {
    Eigen::Matrix<double, 3, Cols> hat;
    hat.row(0) = row11_const + eta * row11_lin;
    hat.row(1) = row22_const + xi * row22_lin;
    hat.row(2) = row12;
    return push * hat;
  }
};

// Shear balancing: G_K = t^2 / (t^2 + alpha * h^2) * G.
double stabilized_shear_modulus(const Material& material, double h_k, double alpha);

ElementMatrices element_stiffness(const Formulation& formulation, const ElementGeometry& geom,
                                  const std::array<Eigen::Vector3d, 4>& nodal_normals,
                                  const Material& material);

// Consistent load vector for constant element-frame surface loads
// (f1, f2, p, tau1, tau2); a global force density is decomposed through the
// element frame first.
struct SurfaceLoad {
  std::optional<Eigen::Vector3d> global_force_density;  // N/m^2
  Eigen::Vector2d tangential = Eigen::Vector2d::Zero();  // N/m^2, element frame
  double pressure = 0.0;                                 // N/m^2 along i3
  Eigen::Vector2d couple = Eigen::Vector2d::Zero();      // N*m/m^2
};

Eigen::Matrix<double, 20, 1> element_load(const ElementGeometry& geom, const SurfaceLoad& load);

// Position-dependent surface force density, evaluated at the Gauss points of
// the bilinear surface interpolant and decomposed through the element frame.
Eigen::Matrix<double, 20, 1> element_load_field(
    const ElementGeometry& geom, const std::array<Eigen::Vector3d, 4>& corners,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& force_density);

// Line load along one element edge (local edge k joins corners k and k+1):
// force and moment densities are evaluated at physical points of the edge and
// integrated with 2-point Gauss. The moment density is a moment vector; its
// virtual work against the rotation of the normal fixes the tau components.
Eigen::Matrix<double, 20, 1> element_edge_load(
    const ElementGeometry& geom, const std::array<Eigen::Vector3d, 4>& corners, int local_edge,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& force,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& moment);

}  // namespace shellbench
