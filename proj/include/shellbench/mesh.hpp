#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace shellbench {

struct Node {
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

// Corner node ids, counter-clockwise when viewed from the outward-normal side.
struct QuadElement {
  std::array<int, 4> nodes{};
};

enum class Provenance { analytic, imported, perturbed };
enum class NormalMode { analytic, averaged };

// Spherical cap parameters: rho0 is the support-circle radius, alpha the
// opening (colatitude) angle, so the sphere radius is r0 = rho0 / sin(alpha).
struct DomeGeometry {
  double rho0 = 15.0;
  double alpha = 0.0;
  double thickness = 0.06;
  double r0() const;
};

// Quadrilateral surface mesh with named boundary tags. Meshes are treated as
// immutable after construction: every operation below returns a new mesh.
struct SurfaceMesh {
  std::vector<Node> nodes;
  std::vector<QuadElement> elements;
  std::map<std::string, std::vector<int>> node_tags;               // sorted, unique
  std::map<std::string, std::vector<std::array<int, 2>>> edge_tags;  // pairs sorted
  Provenance provenance = Provenance::imported;
  double sphere_radius = 0.0;  // > 0 when nodes lie on an origin-centered sphere
  std::uint64_t perturb_seed = 0;
  double perturb_magnitude = 0.0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  bool has_analytic_surface() const { return sphere_radius > 0.0; }

  std::array<Eigen::Vector3d, 4> corner_positions(int element) const;
  std::array<Eigen::Vector3d, 4> corner_normals(int element) const;
  bool node_has_tag(const std::string& tag, int node) const;
  bool node_tagged(int node) const;  // member of any tag set
};

// Quarter spherical cap covered by a 3-patch quad layout with n x n elements
// per patch. Tags "junction", "symmetry_left" (azimuth 0) and
// "symmetry_right" (azimuth pi/2) are populated. For even n the mesh is the
// uniform refinement of the n/2 mesh, so the power-of-two sequence coincides
// with recursive refinement of the initial 3-element mesh.
SurfaceMesh generate_quarter_cap_regular(int n, const DomeGeometry& geom);

// Splits each quad into 4 via edge midpoints and centroid. New nodes are
// reprojected onto the sphere (junction nodes onto the junction circle) when
// the surface is analytic. Tags propagate to the child edges and nodes.
SurfaceMesh refine(const SurfaceMesh& mesh);

// Displaces every untagged node within its tangent plane by a deterministic
// pseudo-random vector of length <= magnitude * (shortest incident edge),
// then reprojects onto the sphere. Tagged (boundary) nodes stay fixed.
SurfaceMesh perturb(const SurfaceMesh& mesh, double magnitude, std::uint64_t seed);

SurfaceMesh compute_nodal_normals(SurfaceMesh mesh, NormalMode mode);

std::map<std::array<int, 2>, std::vector<int>> edge_to_elements(const SurfaceMesh& mesh);
std::vector<std::array<int, 2>> boundary_edges(const SurfaceMesh& mesh);

// Positive corner Jacobians of the straightened quad.
bool element_is_convex(const std::array<Eigen::Vector3d, 4>& corners);

// Consistency audit: unit normals, distinct corner ids, convexity, consistent
// orientation, tagged edges on the boundary. With require_full_boundary_tags
// every boundary edge must carry exactly one tag. Throws GeometryError.
void validate_mesh(const SurfaceMesh& mesh, bool require_full_boundary_tags = true);

}  // namespace shellbench
