#include "shellbench/element.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "shellbench/mesh.hpp"

using namespace shellbench;

namespace {

DomeGeometry girkmann_dome() {
  return DomeGeometry{15.0, 40.0 * std::numbers::pi / 180.0, 0.06};
}

Material concrete() { return Material{20.59e9, 0.0, 0.06}; }

std::array<Eigen::Vector3d, 4> unit_square() {
  return {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0),
          Eigen::Vector3d(0, 1, 0)};
}

std::array<Eigen::Vector3d, 4> flat_rectangle() {
  return {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 0, 0), Eigen::Vector3d(2, 1, 0),
          Eigen::Vector3d(0, 1, 0)};
}

std::array<Eigen::Vector3d, 4> random_convex_quad(std::mt19937& rng) {
  std::uniform_real_distribution<double> jitter(-0.18, 0.18);
  const std::array<Eigen::Vector3d, 4> base = unit_square();
  std::array<Eigen::Vector3d, 4> corners;
  for (int k = 0; k < 4; ++k) {
    corners[k] = base[k] + Eigen::Vector3d(jitter(rng), jitter(rng), 0.0);
  }
  return corners;
}

std::array<Eigen::Vector3d, 4> flat_normals() {
  return {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ(),
          Eigen::Vector3d::UnitZ()};
}

std::array<Eigen::Vector3d, 4> random_unit_normals(std::mt19937& rng) {
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::array<Eigen::Vector3d, 4> normals;
  for (auto& n : normals) {
    n = Eigen::Vector3d(jitter(rng), jitter(rng), 1.0).normalized();
  }
  return normals;
}

// Newton inversion of the bilinear reference map, used by the oracle only.
Eigen::Vector2d inverse_map(const ElementGeometry& geom, const Eigen::Vector2d& x) {
  Eigen::Vector2d ref = Eigen::Vector2d::Zero();
  for (int iteration = 0; iteration < 60; ++iteration) {
    const Eigen::Vector2d current =
        geom.planar.transpose() * shape_values(ref(0), ref(1));
    const Eigen::Vector2d residual = current - x;
    if (residual.norm() < 1e-15) break;
    ref -= geom.jacobian(ref(0), ref(1)).inverse() * residual;
  }
  return ref;
}

int near_zero_eigenvalues(const Eigen::Matrix<double, 20, 20>& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 20, 20>> solver(k);
  const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();
  int count = 0;
  for (int i = 0; i < 20; ++i) {
    if (std::abs(solver.eigenvalues()(i)) < 1e-9 * scale) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("flat element strain operators reduce to plate and plane elasticity") {
  const ElementGeometry geom = straighten_element(unit_square());
  const Curvature b = curvature_coefficients(geom, flat_normals(), 0.2, -0.3);
  const StrainOperators ops = strain_operators(geom, b, 0.2, -0.3);

  // membrane rows touch only u, shear rows are theta + grad w, bending rows
  // are the symmetric gradient of theta
  for (int node = 0; node < 4; ++node) {
    const int c = 5 * node;
    CHECK(ops.membrane(0, c + 2) == doctest::Approx(0.0));  // no b w coupling
    CHECK(ops.membrane(1, c + 2) == doctest::Approx(0.0));
    CHECK(ops.shear(0, c + 0) == doctest::Approx(0.0));  // no b u coupling
    CHECK(ops.shear(1, c + 1) == doctest::Approx(0.0));
    CHECK(ops.bending(0, c + 1) == doctest::Approx(0.0));
    CHECK(ops.bending(0, c + 3) == doctest::Approx(ops.membrane(0, c + 0)));
    CHECK(ops.bending(1, c + 4) == doctest::Approx(ops.membrane(1, c + 1)));
    CHECK(ops.shear(0, c + 3) == doctest::Approx(shape_values(0.2, -0.3)(node)));
  }
}

TEST_CASE("pure normal displacement on a constant-curvature element stretches by -b c") {
  const ElementGeometry geom = straighten_element(unit_square());
  Curvature b;
  b.b11 = 0.05;
  b.b22 = 0.03;
  b.b12 = -0.01;
  const double c = 0.7;
  Eigen::Matrix<double, 20, 1> dofs = Eigen::Matrix<double, 20, 1>::Zero();
  for (int node = 0; node < 4; ++node) dofs(5 * node + 2) = c;
  for (const auto& [xi, eta] : kGauss2x2) {
    const StrainOperators ops = strain_operators(geom, b, xi, eta);
    const Eigen::Vector3d membrane = ops.membrane * dofs;
    CHECK(membrane(0) == doctest::Approx(-b.b11 * c).epsilon(1e-12));
    CHECK(membrane(1) == doctest::Approx(-b.b22 * c).epsilon(1e-12));
    CHECK(membrane(2) == doctest::Approx(-b.b12 * c).epsilon(1e-12));
  }
}

TEST_CASE("strains match a finite-difference evaluation of the continuous fields") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto corners = random_convex_quad(rng);
    const auto normals = random_unit_normals(rng);
    const ElementGeometry geom = straighten_element(corners);
    Eigen::Matrix<double, 20, 1> dofs;
    for (int i = 0; i < 20; ++i) dofs(i) = 0.1 * unit(rng);

    // bilinear fields as functions of the straightened plane coordinates
    auto field = [&](const Eigen::Vector2d& x, int component) {
      const Eigen::Vector2d ref = inverse_map(geom, x);
      const Eigen::Vector4d n = shape_values(ref(0), ref(1));
      double value = 0.0;
      for (int node = 0; node < 4; ++node) value += n(node) * dofs(5 * node + component);
      return value;
    };

    for (const auto& [xi, eta] : kGauss2x2) {
      const Curvature b = curvature_coefficients(geom, normals, xi, eta);
      const StrainOperators ops = strain_operators(geom, b, xi, eta);
      const Eigen::Vector2d x = geom.planar.transpose() * shape_values(xi, eta);

      const double step = 1e-6;
      std::array<std::array<double, 2>, 5> gradient{};  // d(component)/dx_a
      std::array<double, 5> value{};
      for (int component = 0; component < 5; ++component) {
        value[component] = field(x, component);
        for (int direction = 0; direction < 2; ++direction) {
          Eigen::Vector2d forward = x, backward = x;
          forward(direction) += step;
          backward(direction) -= step;
          gradient[component][direction] =
              (field(forward, component) - field(backward, component)) / (2.0 * step);
        }
      }

      const Eigen::Vector3d membrane = ops.membrane * dofs;
      const Eigen::Vector2d shear = ops.shear * dofs;
      const Eigen::Vector3d bending = ops.bending * dofs;

      const double eps11 = gradient[0][0] - b.b11 * value[2];
      const double eps22 = gradient[1][1] - b.b22 * value[2];
      const double eps12 = 0.5 * (gradient[0][1] + gradient[1][0]) - b.b12 * value[2];
      const double gam1 = value[3] + b.b11 * value[0] + b.b12 * value[1] + gradient[2][0];
      const double gam2 = value[4] + b.b12 * value[0] + b.b22 * value[1] + gradient[2][1];
      const double kap11 = gradient[3][0] + b.b12 * (b.b12 * value[2] - gradient[1][0]);
      const double kap22 = gradient[4][1] + b.b12 * (b.b12 * value[2] - gradient[0][1]);
      const double kap12 = 0.5 * (gradient[3][1] + gradient[4][0] +
                                  b.b11 * (b.b12 * value[2] - gradient[0][1]) +
                                  b.b22 * (b.b12 * value[2] - gradient[1][0]));

      const double tol = 1e-6;
      CHECK(membrane(0) == doctest::Approx(eps11).epsilon(tol));
      CHECK(membrane(1) == doctest::Approx(eps22).epsilon(tol));
      CHECK(membrane(2) == doctest::Approx(eps12).epsilon(tol));
      CHECK(shear(0) == doctest::Approx(gam1).epsilon(tol));
      CHECK(shear(1) == doctest::Approx(gam2).epsilon(tol));
      CHECK(bending(0) == doctest::Approx(kap11).epsilon(tol));
      CHECK(bending(1) == doctest::Approx(kap22).epsilon(tol));
      CHECK(bending(2) == doctest::Approx(kap12).epsilon(tol));
    }
  }
}

TEST_CASE("stabilized shear modulus follows the balancing formula") {
  const Material mat = concrete();
  const double g = mat.shear_modulus();

  // alpha -> 0 recovers G
  CHECK(stabilized_shear_modulus(mat, 1.0, 1e-14) == doctest::Approx(g).epsilon(1e-9));
  // direct arithmetic at t = 0.06, h = 1, alpha = 0.2
  CHECK(stabilized_shear_modulus(mat, 1.0, 0.2) / g ==
        doctest::Approx(0.0036 / 0.2036).epsilon(1e-14));
  // h = t / sqrt(alpha) halves the modulus
  CHECK(stabilized_shear_modulus(mat, 0.06 / std::sqrt(0.2), 0.2) ==
        doctest::Approx(0.5 * g).epsilon(1e-14));
  CHECK_THROWS_AS(stabilized_shear_modulus(mat, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("flat rectangular element has rank 14 for every formulation") {
  const ElementGeometry geom = straighten_element(flat_rectangle());
  for (const Formulation& formulation :
       {Formulation::disp4(), Formulation::mitc4c(), Formulation::mitc4s(),
        Formulation::mitc4c().stabilized(0.2), Formulation::mitc4s().stabilized(0.2)}) {
    const ElementMatrices m = element_stiffness(formulation, geom, flat_normals(), concrete());
    CHECK(near_zero_eigenvalues(m.stiffness) == 6);
  }
}

TEST_CASE("element stiffness is symmetric and positive semidefinite on random quads") {
  std::mt19937 rng(99);
  for (const Formulation& formulation :
       {Formulation::disp4(), Formulation::mitc4c(), Formulation::mitc4s()}) {
    for (int trial = 0; trial < 4; ++trial) {
      const ElementGeometry geom = straighten_element(random_convex_quad(rng));
      const auto normals = random_unit_normals(rng);
      const ElementMatrices m = element_stiffness(formulation, geom, normals, concrete());
      CHECK((m.stiffness - m.stiffness.transpose()).norm() <= 1e-10 * m.stiffness.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 20, 20>> solver(m.stiffness);
      CHECK(solver.eigenvalues()(0) > -1e-9 * solver.eigenvalues()(19));
    }
  }
}

TEST_CASE("projection does not change constant-shear states on flat elements") {
  const ElementGeometry geom = straighten_element(unit_square());
  Eigen::Matrix<double, 20, 1> dofs = Eigen::Matrix<double, 20, 1>::Zero();
  for (int node = 0; node < 4; ++node) {
    dofs(5 * node + 3) = 0.4;  // constant theta1
    dofs(5 * node + 4) = -0.2;
  }
  const ElementMatrices disp4 =
      element_stiffness(Formulation::disp4(), geom, flat_normals(), concrete());
  const ElementMatrices mitc4c =
      element_stiffness(Formulation::mitc4c(), geom, flat_normals(), concrete());
  const double energy_disp4 = dofs.dot(disp4.stiffness * dofs);
  const double energy_mitc4c = dofs.dot(mitc4c.stiffness * dofs);
  CHECK(energy_disp4 == doctest::Approx(energy_mitc4c).epsilon(1e-12));
}

TEST_CASE("rigid translation energy of spherical elements decays at second order") {
  const DomeGeometry dome = girkmann_dome();
  const Eigen::Vector3d translation(0.3, -0.5, 0.8);
  double previous = 0.0;
  for (int n : {8, 16, 32}) {
    const SurfaceMesh mesh = generate_quarter_cap_regular(n, dome);
    const int e = mesh.element_count() / 2;
    const ElementGeometry geom = straighten_element(mesh.corner_positions(e));
    const ElementMatrices m =
        element_stiffness(Formulation::mitc4c(), geom, mesh.corner_normals(e), concrete());

    Eigen::Matrix<double, 20, 1> dofs;
    for (int k = 0; k < 4; ++k) {
      dofs.segment<5>(5 * k) << translation.dot(geom.frame.i1), translation.dot(geom.frame.i2),
          translation.dot(geom.frame.i3), 0.0, 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 20, 20>> solver(m.stiffness);
    const double ratio = dofs.dot(m.stiffness * dofs) /
                         (solver.eigenvalues()(19) * dofs.squaredNorm());
    if (previous > 0.0) CHECK(ratio < previous / 3.0);
    previous = ratio;
  }
}

TEST_CASE("stabilization never increases the energy") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const ElementGeometry geom = straighten_element(random_convex_quad(rng));
  const auto normals = random_unit_normals(rng);
  Eigen::Matrix<double, 20, 1> dofs;
  for (int i = 0; i < 20; ++i) dofs(i) = unit(rng);
  const ElementMatrices plain =
      element_stiffness(Formulation::mitc4c(), geom, normals, concrete());
  const ElementMatrices damped =
      element_stiffness(Formulation::mitc4c().stabilized(0.2), geom, normals, concrete());
  CHECK(dofs.dot(damped.stiffness * dofs) <= dofs.dot(plain.stiffness * dofs) + 1e-9);
}

TEST_CASE("uniform pressure splits evenly between the four nodes") {
  const ElementGeometry geom = straighten_element(unit_square());
  SurfaceLoad load;
  load.pressure = 6.0;
  const auto f = element_load(geom, load);
  for (int node = 0; node < 4; ++node) {
    CHECK(f(5 * node + 2) == doctest::Approx(6.0 / 4.0).epsilon(1e-13));
    CHECK(f(5 * node + 0) == doctest::Approx(0.0));
    CHECK(f(5 * node + 3) == doctest::Approx(0.0));
  }
}

TEST_CASE("gravity on a horizontal element is a pure pressure load") {
  const ElementGeometry geom = straighten_element(unit_square());
  SurfaceLoad load;
  load.global_force_density = Eigen::Vector3d(0.0, 0.0, -9.0);
  const auto f = element_load(geom, load);
  for (int node = 0; node < 4; ++node) {
    CHECK(f(5 * node + 0) == doctest::Approx(0.0));
    CHECK(f(5 * node + 1) == doctest::Approx(0.0));
    CHECK(f(5 * node + 2) == doctest::Approx(-9.0 / 4.0).epsilon(1e-13));
  }
}

TEST_CASE("unit edge moment integrates to the edge length") {
  const auto corners = flat_rectangle();
  const ElementGeometry geom = straighten_element(corners);
  // moment density of 1 N*m/m along i2 on the bottom edge (length 2)
  const auto f = element_edge_load(
      geom, corners, 0, nullptr,
      [&](const Eigen::Vector3d&) { return Eigen::Vector3d(geom.frame.i2); });
  double tau_total = 0.0;
  for (int node = 0; node < 4; ++node) tau_total += f(5 * node + 3);
  CHECK(tau_total == doctest::Approx(2.0).epsilon(1e-13));
}
