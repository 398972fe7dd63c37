#include "shellbench/element.hpp"

#include <cmath>

#include "shellbench/errors.hpp"

namespace shellbench {

std::string Formulation::name() const {
  std::string base;
  switch (reduction) {
    case Reduction::none: base = "disp4"; break;
    case Reduction::shear: base = "mitc4c"; break;
    case Reduction::shear_and_membrane: base = "mitc4s"; break;
  }
  if (stabilization) base += "_stab";
  return base;
}

std::array<std::array<double, 2>, 8> shear_sample_points() {
  const double g = kGaussPoint;
  return {{{-g, -1.0}, {g, -1.0},    // bottom edge
           {-g, 1.0},  {g, 1.0},     // top edge
           {-1.0, -g}, {-1.0, g},    // left edge
           {1.0, -g},  {1.0, g}}};   // right edge
}

std::array<std::array<double, 2>, 12> membrane_sample_points() {
  const double g = kGaussPoint;
  return {{{-g, -1.0}, {g, -1.0},    // bottom edge
           {-g, 1.0},  {g, 1.0},     // top edge
           {-1.0, -g}, {-1.0, g},    // left edge
           {1.0, -g},  {1.0, g},     // right edge
           {-g, -g},   {g, -g},  {g, g},  {-g, g}}};
}

StrainOperators strain_operators(const ElementGeometry& geom, const Curvature& curvature,
                                 double xi, double eta) {
  const Eigen::Matrix2d jac = geom.jacobian(xi, eta);
  const double det = jac.determinant();
  if (!(det > 0.0)) throw GeometryError("singular Jacobian in strain evaluation");
  const Eigen::Matrix<double, 4, 2> dn_dx = shape_gradients(xi, eta) * jac.inverse();
  const Eigen::Vector4d n = shape_values(xi, eta);
  const double b11 = curvature.b11, b22 = curvature.b22, b12 = curvature.b12;

  StrainOperators ops;
  ops.membrane.setZero();
  ops.bending.setZero();
  ops.shear.setZero();
  for (int k = 0; k < 4; ++k) {
    const int c = 5 * k;  // u1, u2, w, th1, th2
    const double dx = dn_dx(k, 0);
    const double dy = dn_dx(k, 1);
    const double nk = n(k);

    // membrane: eps_ab = (u_a,b + u_b,a)/2 - b_ab w
    ops.membrane(0, c + 0) = dx;
    ops.membrane(0, c + 2) = -b11 * nk;
    ops.membrane(1, c + 1) = dy;
    ops.membrane(1, c + 2) = -b22 * nk;
    ops.membrane(2, c + 0) = 0.5 * dy;
    ops.membrane(2, c + 1) = 0.5 * dx;
    ops.membrane(2, c + 2) = -b12 * nk;

    // transverse shear: gam_a = th_a + b_la u_l + w,a
    ops.shear(0, c + 3) = nk;
    ops.shear(0, c + 0) = b11 * nk;
    ops.shear(0, c + 1) = b12 * nk;
    ops.shear(0, c + 2) = dx;
    ops.shear(1, c + 4) = nk;
    ops.shear(1, c + 0) = b12 * nk;
    ops.shear(1, c + 1) = b22 * nk;
    ops.shear(1, c + 2) = dy;

    // bending, simplified component-wise expressions:
    //   kap11 = th1,1 + b12 (b12 w - u2,1)
    //   kap22 = th2,2 + b12 (b12 w - u1,2)
    //   kap12 = (th1,2 + th2,1 + b11 (b12 w - u1,2) + b22 (b12 w - u2,1)) / 2
    ops.bending(0, c + 3) = dx;
    ops.bending(0, c + 2) = b12 * b12 * nk;
    ops.bending(0, c + 1) = -b12 * dx;
    ops.bending(1, c + 4) = dy;
    ops.bending(1, c + 2) = b12 * b12 * nk;
    ops.bending(1, c + 0) = -b12 * dy;
    ops.bending(2, c + 3) = 0.5 * dy;
    ops.bending(2, c + 4) = 0.5 * dx;
    ops.bending(2, c + 2) = 0.5 * (b11 + b22) * b12 * nk;
    ops.bending(2, c + 0) = -0.5 * b11 * dy;
    ops.bending(2, c + 1) = -0.5 * b22 * dx;
  }
  return ops;
}

Eigen::Matrix3d voigt_congruence(const Eigen::Matrix2d& a) {
  Eigen::Matrix3d v;
  v << a(0, 0) * a(0, 0), a(1, 0) * a(1, 0), 2.0 * a(0, 0) * a(1, 0),  //
      a(0, 1) * a(0, 1), a(1, 1) * a(1, 1), 2.0 * a(0, 1) * a(1, 1),   //
      a(0, 0) * a(0, 1), a(1, 0) * a(1, 1), a(0, 0) * a(1, 1) + a(1, 0) * a(0, 1);
  return v;
}

double stabilized_shear_modulus(const Material& material, double h_k, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("stabilization parameter must be positive");
  const double t2 = material.thickness * material.thickness;
  return t2 / (t2 + alpha * h_k * h_k) * material.shear_modulus();
}

namespace {

// Plane-stress constitutive block acting on (e11, e22, e12):
// scale * [[1, nu, 0], [nu, 1, 0], [0, 0, 2(1-nu)]].
Eigen::Matrix3d in_plane_law(double scale, double nu) {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  d(0, 0) = d(1, 1) = scale;
  d(0, 1) = d(1, 0) = nu * scale;
  d(2, 2) = 2.0 * (1.0 - nu) * scale;
  return d;
}

}  // namespace

ElementMatrices element_stiffness(const Formulation& formulation, const ElementGeometry& geom,
                                  const std::array<Eigen::Vector3d, 4>& nodal_normals,
                                  const Material& material) {
  const double e = material.youngs_modulus;
  const double nu = material.poisson_ratio;
  const double t = material.thickness;
  const Eigen::Matrix3d d_membrane = in_plane_law(e * t / (1.0 - nu * nu), nu);
  const Eigen::Matrix3d d_bending = in_plane_law(e * t * t * t / (12.0 * (1.0 - nu * nu)), nu);
  const double g_shear =
      formulation.stabilization
          ? stabilized_shear_modulus(material, geom.h_k, *formulation.stabilization)
          : material.shear_modulus();
  const Eigen::Matrix2d d_shear = g_shear * t * Eigen::Matrix2d::Identity();

  std::optional<ShearReduction<20>> shear_reduction;
  if (formulation.reduction != Reduction::none) {
    std::array<Eigen::Matrix<double, 2, 20>, 8> samples;
    const auto points = shear_sample_points();
    for (int s = 0; s < 8; ++s) {
      const auto [xi, eta] = points[s];
      const Curvature b = curvature_coefficients(geom, nodal_normals, xi, eta);
      samples[s] = strain_operators(geom, b, xi, eta).shear;
    }
    shear_reduction = ShearReduction<20>::create(geom, samples);
  }

  std::optional<MembraneReduction<20>> membrane_reduction;
  if (formulation.reduction == Reduction::shear_and_membrane) {
    std::array<Eigen::Matrix<double, 3, 20>, 12> samples;
    const auto points = membrane_sample_points();
    for (int s = 0; s < 12; ++s) {
      const auto [xi, eta] = points[s];
      const Curvature b = curvature_coefficients(geom, nodal_normals, xi, eta);
      samples[s] = strain_operators(geom, b, xi, eta).membrane;
    }
    membrane_reduction = MembraneReduction<20>::create(geom, samples);
  }

  ElementMatrices result;
  result.stiffness.setZero();
  for (const auto& [xi, eta] : kGauss2x2) {
    const Curvature b = curvature_coefficients(geom, nodal_normals, xi, eta);
    StrainOperators ops = strain_operators(geom, b, xi, eta);
    if (shear_reduction) ops.shear = shear_reduction->evaluate(geom, xi, eta);
    if (membrane_reduction) ops.membrane = membrane_reduction->evaluate(xi, eta);

    const double dv = geom.jacobian(xi, eta).determinant();
    result.stiffness += dv * (ops.membrane.transpose() * d_membrane * ops.membrane +
                              ops.bending.transpose() * d_bending * ops.bending +
                              ops.shear.transpose() * d_shear * ops.shear);
  }
  return result;
}

Eigen::Matrix<double, 20, 1> element_load(const ElementGeometry& geom, const SurfaceLoad& load) {
  Eigen::Matrix<double, 2, 1> tangential = load.tangential;
  double pressure = load.pressure;
  if (load.global_force_density) {
    tangential.x() += load.global_force_density->dot(geom.frame.i1);
    tangential.y() += load.global_force_density->dot(geom.frame.i2);
    pressure += load.global_force_density->dot(geom.frame.i3);
  }

  Eigen::Matrix<double, 20, 1> f = Eigen::Matrix<double, 20, 1>::Zero();
  for (const auto& [xi, eta] : kGauss2x2) {
    const double dv = geom.jacobian(xi, eta).determinant();
    const Eigen::Vector4d n = shape_values(xi, eta);
    for (int k = 0; k < 4; ++k) {
      const int c = 5 * k;
      f(c + 0) += dv * n(k) * tangential.x();
      f(c + 1) += dv * n(k) * tangential.y();
      f(c + 2) += dv * n(k) * pressure;
      f(c + 3) += dv * n(k) * load.couple.x();
      f(c + 4) += dv * n(k) * load.couple.y();
    }
  }
  return f;
}

Eigen::Matrix<double, 20, 1> element_load_field(
    const ElementGeometry& geom, const std::array<Eigen::Vector3d, 4>& corners,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& force_density) {
  Eigen::Matrix<double, 20, 1> f = Eigen::Matrix<double, 20, 1>::Zero();
  for (const auto& [xi, eta] : kGauss2x2) {
    const double dv = geom.jacobian(xi, eta).determinant();
    const Eigen::Vector4d n = shape_values(xi, eta);
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k) point += n(k) * corners[k];
    const Eigen::Vector3d q = force_density(point);
    const Eigen::Vector3d components(q.dot(geom.frame.i1), q.dot(geom.frame.i2),
                                     q.dot(geom.frame.i3));
    for (int k = 0; k < 4; ++k) {
      for (int c = 0; c < 3; ++c) f(5 * k + c) += dv * n(k) * components(c);
    }
  }
  return f;
}

Eigen::Matrix<double, 20, 1> element_edge_load(
    const ElementGeometry& geom, const std::array<Eigen::Vector3d, 4>& corners, int local_edge,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& force,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& moment) {
  const int a = local_edge;
  const int b = (local_edge + 1) % 4;
  const Eigen::Vector3d midpoint = 0.5 * (corners[a] + corners[b]);
  const Eigen::Vector3d half = 0.5 * (corners[b] - corners[a]);
  const double measure = half.norm();  // |dp/ds| on s in [-1, 1]

  Eigen::Matrix<double, 20, 1> f = Eigen::Matrix<double, 20, 1>::Zero();
  for (const double s : {-kGaussPoint, kGaussPoint}) {
    const Eigen::Vector3d p = midpoint + s * half;
    const double na = 0.5 * (1.0 - s);
    const double nb = 0.5 * (1.0 + s);
    if (force) {
      const Eigen::Vector3d ell = force(p);
      const Eigen::Vector3d components(ell.dot(geom.frame.i1), ell.dot(geom.frame.i2),
                                       ell.dot(geom.frame.i3));
      for (int k = 0; k < 3; ++k) {
        f(5 * a + k) += measure * na * components(k);
        f(5 * b + k) += measure * nb * components(k);
      }
    }
    if (moment) {
      // work = m . omega with omega = th1 i2 - th2 i1
      const Eigen::Vector3d m = moment(p);
      const double tau1 = m.dot(geom.frame.i2);
      const double tau2 = -m.dot(geom.frame.i1);
      f(5 * a + 3) += measure * na * tau1;
      f(5 * a + 4) += measure * na * tau2;
      f(5 * b + 3) += measure * nb * tau1;
      f(5 * b + 4) += measure * nb * tau2;
    }
  }
  return f;
}

}  // namespace shellbench
