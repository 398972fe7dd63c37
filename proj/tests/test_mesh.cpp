#include "shellbench/mesh.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "shellbench/errors.hpp"

using namespace shellbench;

namespace {

DomeGeometry girkmann_dome() {
  return DomeGeometry{15.0, 40.0 * std::numbers::pi / 180.0, 0.06};
}

int expected_nodes(int n) { return 3 * (n + 1) * (n + 1) - 3 * (n + 1) + 1; }

}  // namespace

TEST_CASE("initial cap mesh has 3 elements and 7 nodes") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(1, girkmann_dome());
  CHECK(mesh.element_count() == 3);
  CHECK(mesh.node_count() == 7);
  CHECK_NOTHROW(validate_mesh(mesh));
}

TEST_CASE("element and node counts follow the 3-patch formulas") {
  for (int n : {1, 2, 3, 4, 8}) {
    const SurfaceMesh mesh = generate_quarter_cap_regular(n, girkmann_dome());
    CHECK(mesh.element_count() == 3 * n * n);
    CHECK(mesh.node_count() == expected_nodes(n));
    CHECK_NOTHROW(validate_mesh(mesh));
  }
}

TEST_CASE("generate rejects non-positive subdivision") {
  CHECK_THROWS_AS(generate_quarter_cap_regular(0, girkmann_dome()), std::invalid_argument);
  CHECK_THROWS_AS(generate_quarter_cap_regular(-2, girkmann_dome()), std::invalid_argument);
}

TEST_CASE("all nodes lie on the sphere and normals are radial") {
  const DomeGeometry dome = girkmann_dome();
  const SurfaceMesh mesh = generate_quarter_cap_regular(4, dome);
  for (const auto& node : mesh.nodes) {
    CHECK(std::abs(node.position.norm() - dome.r0()) < 1e-9 * dome.r0());
    CHECK((node.normal - node.position.normalized()).norm() < 1e-12);
  }
}

TEST_CASE("junction nodes sit at colatitude alpha on the N=8 mesh") {
  const DomeGeometry dome = girkmann_dome();
  const SurfaceMesh mesh = generate_quarter_cap_regular(8, dome);
  CHECK(mesh.element_count() == 192);
  const auto& junction = mesh.node_tags.at("junction");
  CHECK(junction.size() == 17);  // 2n + 1 nodes along the arc
  for (int node : junction) {
    const Eigen::Vector3d p = mesh.nodes[node].position;
    const double colatitude = std::acos(p.z() / p.norm());
    CHECK(std::abs(colatitude - dome.alpha) < 1e-9);
  }
}

TEST_CASE("boundary tags cover the boundary once and lie on their planes") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(4, girkmann_dome());
  std::size_t tagged = 0;
  for (const auto& [name, edges] : mesh.edge_tags) tagged += edges.size();
  CHECK(tagged == boundary_edges(mesh).size());
  for (int node : mesh.node_tags.at("symmetry_left")) {
    CHECK(std::abs(mesh.nodes[node].position.y()) < 1e-12);
  }
  for (int node : mesh.node_tags.at("symmetry_right")) {
    CHECK(std::abs(mesh.nodes[node].position.x()) < 1e-12);
  }
}

TEST_CASE("refine splits each quad in four and propagates tags") {
  const SurfaceMesh coarse = generate_quarter_cap_regular(1, girkmann_dome());
  const SurfaceMesh fine = refine(coarse);
  CHECK(fine.element_count() == 12);
  CHECK(fine.node_count() == expected_nodes(2));
  CHECK_NOTHROW(validate_mesh(fine));

  // images of the original tagged nodes stay tagged
  for (const auto& [name, nodes] : coarse.node_tags) {
    const auto& fine_nodes = fine.node_tags.at(name);
    const std::set<int> fine_set(fine_nodes.begin(), fine_nodes.end());
    for (int node : nodes) CHECK(fine_set.count(node) == 1);
  }
}

TEST_CASE("refine of generate(n) equals generate(2n)") {
  const DomeGeometry dome = girkmann_dome();
  for (int n : {1, 2, 4}) {
    const SurfaceMesh direct = generate_quarter_cap_regular(2 * n, dome);
    const SurfaceMesh refined = refine(generate_quarter_cap_regular(n, dome));
    REQUIRE(direct.node_count() == refined.node_count());
    for (int i = 0; i < direct.node_count(); ++i) {
      CHECK((direct.nodes[i].position - refined.nodes[i].position).norm() < 1e-9);
    }
  }
}

TEST_CASE("odd subdivisions produce conforming tagged meshes") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(3, girkmann_dome());
  CHECK(mesh.element_count() == 27);
  CHECK(mesh.node_count() == expected_nodes(3));
  CHECK_NOTHROW(validate_mesh(mesh));
  const SurfaceMesh refined = refine(mesh);
  CHECK(refined.element_count() == generate_quarter_cap_regular(6, girkmann_dome()).element_count());
  CHECK_NOTHROW(validate_mesh(refined));
}

TEST_CASE("perturb is the identity at zero magnitude") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(4, girkmann_dome());
  const SurfaceMesh unperturbed = perturb(mesh, 0.0, 42);
  for (int i = 0; i < mesh.node_count(); ++i) {
    CHECK(unperturbed.nodes[i].position == mesh.nodes[i].position);
  }
}

TEST_CASE("perturb is deterministic in the seed") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(8, girkmann_dome());
  const SurfaceMesh a = perturb(mesh, 0.25, 7);
  const SurfaceMesh b = perturb(mesh, 0.25, 7);
  const SurfaceMesh c = perturb(mesh, 0.25, 8);
  bool identical = true;
  bool different_seed_differs = false;
  for (int i = 0; i < mesh.node_count(); ++i) {
    identical = identical && (a.nodes[i].position == b.nodes[i].position);
    different_seed_differs =
        different_seed_differs || (a.nodes[i].position != c.nodes[i].position);
  }
  CHECK(identical);
  CHECK(different_seed_differs);
}

TEST_CASE("perturb keeps boundary nodes and stays on the sphere") {
  const DomeGeometry dome = girkmann_dome();
  const SurfaceMesh mesh = generate_quarter_cap_regular(8, dome);
  const SurfaceMesh shaken = perturb(mesh, 0.25, 3);
  bool interior_moved = false;
  for (int i = 0; i < mesh.node_count(); ++i) {
    CHECK(std::abs(shaken.nodes[i].position.norm() - dome.r0()) < 1e-9 * dome.r0());
    if (mesh.node_tagged(i)) {
      CHECK(shaken.nodes[i].position == mesh.nodes[i].position);
    } else if (shaken.nodes[i].position != mesh.nodes[i].position) {
      interior_moved = true;
    }
  }
  CHECK(interior_moved);
}

TEST_CASE("perturbed N=32 mesh at magnitude 0.25 stays convex") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(32, girkmann_dome());
  const SurfaceMesh shaken = perturb(mesh, 0.25, 2024);
  for (int e = 0; e < shaken.element_count(); ++e) {
    CHECK(element_is_convex(shaken.corner_positions(e)));
  }
  CHECK_NOTHROW(validate_mesh(shaken));
}

TEST_CASE("perturb validates the magnitude range") {
  const SurfaceMesh mesh = generate_quarter_cap_regular(2, girkmann_dome());
  CHECK_THROWS_AS(perturb(mesh, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(perturb(mesh, 0.41, 1), std::invalid_argument);
}

TEST_CASE("analytic normals equal position over radius") {
  SurfaceMesh mesh = generate_quarter_cap_regular(2, girkmann_dome());
  for (auto& node : mesh.nodes) node.normal = Eigen::Vector3d::UnitX();
  mesh = compute_nodal_normals(std::move(mesh), NormalMode::analytic);
  for (const auto& node : mesh.nodes) {
    CHECK((node.normal - node.position.normalized()).norm() < 1e-15);
  }
}

TEST_CASE("averaged normals of a flat mesh equal the plane normal") {
  // 2x2 flat patch in the z = 0 plane
  SurfaceMesh mesh;
  for (int j = 0; j <= 2; ++j) {
    for (int i = 0; i <= 2; ++i) {
      mesh.nodes.push_back(
          Node{3 * j + i, Eigen::Vector3d(i, j, 0.0), Eigen::Vector3d::UnitZ()});
    }
  }
  auto id = [](int i, int j) { return 3 * j + i; };
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      mesh.elements.push_back(
          QuadElement{{id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}});
    }
  }
  mesh = compute_nodal_normals(std::move(mesh), NormalMode::averaged);
  for (const auto& node : mesh.nodes) {
    CHECK((node.normal - Eigen::Vector3d::UnitZ()).norm() < 1e-15);
  }
}

namespace {

// Structured lat-long patch on the unit sphere, away from pole and seams.
SurfaceMesh structured_sphere_patch(int n) {
  SurfaceMesh mesh;
  mesh.provenance = Provenance::analytic;
  mesh.sphere_radius = 1.0;
  const double c0 = 0.5, c1 = 1.1;   // colatitude range
  const double a0 = 0.0, a1 = 0.8;   // azimuth range
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double colatitude = c0 + (c1 - c0) * i / n;
      const double azimuth = a0 + (a1 - a0) * j / n;
      const Eigen::Vector3d p(std::sin(colatitude) * std::cos(azimuth),
                              std::sin(colatitude) * std::sin(azimuth), std::cos(colatitude));
      mesh.nodes.push_back(Node{(n + 1) * j + i, p, p});
    }
  }
  auto id = [n](int i, int j) { return (n + 1) * j + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.elements.push_back(
          QuadElement{{id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}});
    }
  }
  return mesh;
}

double worst_interior_normal_angle(const SurfaceMesh& mesh, const SurfaceMesh& averaged,
                                   const std::set<int>& boundary) {
  double worst = 0.0;
  for (const auto& node : mesh.nodes) {
    if (boundary.count(node.id) > 0) continue;
    const double angle = std::acos(
        std::clamp(averaged.nodes[node.id].normal.dot(node.position.normalized()), -1.0, 1.0));
    worst = std::max(worst, angle);
  }
  return worst;
}

std::set<int> boundary_node_set(const SurfaceMesh& mesh) {
  std::set<int> boundary;
  for (const auto& e : boundary_edges(mesh)) {
    boundary.insert(e[0]);
    boundary.insert(e[1]);
  }
  return boundary;
}

}  // namespace

TEST_CASE("averaged normals are second order on a smooth structured mesh") {
  double previous = 0.0;
  for (int n : {8, 16, 32}) {
    const SurfaceMesh mesh = structured_sphere_patch(n);
    const SurfaceMesh averaged = compute_nodal_normals(mesh, NormalMode::averaged);
    const double worst = worst_interior_normal_angle(mesh, averaged, boundary_node_set(mesh));
    if (previous > 0.0) CHECK(worst < previous / 3.0);  // ~4x decay per refinement
    previous = worst;
  }
}

TEST_CASE("averaged normals converge on the dome mesh") {
  // The 3-patch layout has seam nodes with asymmetric element fans, which
  // limit the interior max to first order; the error must still shrink.
  const DomeGeometry dome = girkmann_dome();
  double previous = 0.0;
  for (int n : {8, 16, 32}) {
    SurfaceMesh mesh = generate_quarter_cap_regular(n, dome);
    const SurfaceMesh averaged = compute_nodal_normals(mesh, NormalMode::averaged);
    const double worst = worst_interior_normal_angle(mesh, averaged, boundary_node_set(mesh));
    if (previous > 0.0) CHECK(worst < previous / 1.8);
    previous = worst;
  }
}

TEST_CASE("analytic normals require an analytic surface") {
  SurfaceMesh mesh = generate_quarter_cap_regular(1, girkmann_dome());
  mesh.sphere_radius = 0.0;
  mesh.provenance = Provenance::imported;
  CHECK_THROWS_AS(compute_nodal_normals(std::move(mesh), NormalMode::analytic),
                  std::invalid_argument);
}
