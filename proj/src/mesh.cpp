#include "shellbench/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "shellbench/errors.hpp"

namespace shellbench {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d sphere_point(double radius, double colatitude, double azimuth) {
  return radius * Eigen::Vector3d(std::sin(colatitude) * std::cos(azimuth),
                                  std::sin(colatitude) * std::sin(azimuth),
                                  std::cos(colatitude));
}

std::array<int, 2> sorted_edge(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void sort_unique(std::vector<std::array<int, 2>>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Facet normal from the diagonal cross product; robust for warped quads.
Eigen::Vector3d facet_normal(const std::array<Eigen::Vector3d, 4>& p) {
  return ((p[2] - p[0]).cross(p[3] - p[1])).normalized();
}

// Flip elements so the facet normal points away from the origin (spheres) or
// along the stored nodal normals otherwise.
void orient_outward(SurfaceMesh& mesh) {
  for (auto& element : mesh.elements) {
    std::array<Eigen::Vector3d, 4> p;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k) {
      p[k] = mesh.nodes[element.nodes[k]].position;
      centroid += 0.25 * p[k];
    }
    const Eigen::Vector3d reference =
        mesh.has_analytic_surface() ? centroid.normalized()
                                    : mesh.nodes[element.nodes[0]].normal;
    if (facet_normal(p).dot(reference) < 0.0) {
      std::swap(element.nodes[1], element.nodes[3]);
    }
  }
}

void tags_from_edges(SurfaceMesh& mesh) {
  for (auto& [name, edges] : mesh.edge_tags) {
    sort_unique(edges);
    auto& nodes = mesh.node_tags[name];
    for (const auto& e : edges) {
      nodes.push_back(e[0]);
      nodes.push_back(e[1]);
    }
    sort_unique(nodes);
  }
}

SurfaceMesh initial_cap_mesh(const DomeGeometry& geom) {
  const double r = geom.r0();
  const double a = geom.alpha;

  SurfaceMesh mesh;
  mesh.provenance = Provenance::analytic;
  mesh.sphere_radius = r;
  // pole, meridian midpoints, center, junction corners and arc midpoint
  const Eigen::Vector3d pole = sphere_point(r, 0.0, 0.0);
  const Eigen::Vector3d m1 = sphere_point(r, a / 2, 0.0);
  const Eigen::Vector3d m2 = sphere_point(r, a / 2, kPi / 2);
  const Eigen::Vector3d c = sphere_point(r, a / 2, kPi / 4);
  const Eigen::Vector3d corner_a = sphere_point(r, a, 0.0);
  const Eigen::Vector3d j = sphere_point(r, a, kPi / 4);
  const Eigen::Vector3d corner_b = sphere_point(r, a, kPi / 2);
  int id = 0;
  for (const auto& p : {pole, m1, m2, c, corner_a, j, corner_b}) {
    mesh.nodes.push_back(Node{id++, p, p.normalized()});
  }
  mesh.elements = {QuadElement{{0, 1, 3, 2}},   // pole quad
                   QuadElement{{1, 4, 5, 3}},   // azimuth [0, pi/4]
                   QuadElement{{2, 3, 5, 6}}};  // azimuth [pi/4, pi/2]
  mesh.edge_tags["junction"] = {sorted_edge(4, 5), sorted_edge(5, 6)};
  mesh.edge_tags["symmetry_left"] = {sorted_edge(0, 1), sorted_edge(1, 4)};
  mesh.edge_tags["symmetry_right"] = {sorted_edge(0, 2), sorted_edge(2, 6)};
  tags_from_edges(mesh);
  return mesh;
}

// General-n construction: three transfinite patches in the azimuthal
// equidistant plane (X,Y) = colatitude * (cos azimuth, sin azimuth). The
// inner patch covers the cap colatitude <= alpha/2 with a Coons map; the two
// outer patches are rectangles in (azimuth, colatitude) coordinates.
SurfaceMesh transfinite_cap_mesh(int n, const DomeGeometry& geom) {
  const double r = geom.r0();
  const double a = geom.alpha;

  SurfaceMesh mesh;
  mesh.provenance = Provenance::analytic;
  mesh.sphere_radius = r;

  auto add_node = [&](double colatitude, double azimuth) {
    const Eigen::Vector3d p = sphere_point(r, colatitude, azimuth);
    mesh.nodes.push_back(Node{mesh.node_count(), p, p.normalized()});
    return mesh.nodes.back().id;
  };

  using Grid = std::vector<std::vector<int>>;
  Grid p1(n + 1, std::vector<int>(n + 1, -1));
  Grid p2(n + 1, std::vector<int>(n + 1, -1));
  Grid p3(n + 1, std::vector<int>(n + 1, -1));

  // Inner patch: Coons interpolation between two straight meridian edges and
  // the two arcs joining them at colatitude alpha/2.
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    for (int jj = 0; jj <= n; ++jj) {
      const double v = static_cast<double>(jj) / n;
      const Eigen::Vector2d bottom(u * a / 2, 0.0);
      const Eigen::Vector2d left(0.0, v * a / 2);
      const Eigen::Vector2d right(a / 2 * std::cos(v * kPi / 4),
                                  a / 2 * std::sin(v * kPi / 4));
      const Eigen::Vector2d top(a / 2 * std::cos(kPi / 2 - u * kPi / 4),
                                a / 2 * std::sin(kPi / 2 - u * kPi / 4));
      const Eigen::Vector2d c00(0.0, 0.0);
      const Eigen::Vector2d c10(a / 2, 0.0);
      const Eigen::Vector2d c11(a / 2 * std::cos(kPi / 4), a / 2 * std::sin(kPi / 4));
      const Eigen::Vector2d c01(0.0, a / 2);
      const Eigen::Vector2d xy = (1 - v) * bottom + v * top + (1 - u) * left + u * right -
                                 ((1 - u) * (1 - v) * c00 + u * (1 - v) * c10 +
                                  u * v * c11 + (1 - u) * v * c01);
      p1[i][jj] = add_node(xy.norm(), std::atan2(xy.y(), xy.x()));
    }
  }
  // Outer patches: uniform in azimuth and colatitude; the shared rows and
  // columns reuse inner-patch and patch-2 node ids.
  for (int i = 0; i <= n; ++i) {
    for (int jj = 0; jj <= n; ++jj) {
      if (jj == 0) {
        p2[i][jj] = p1[n][i];
        continue;
      }
      const double azimuth = i * kPi / (4.0 * n);
      const double colatitude = a / 2 + jj * a / (2.0 * n);
      p2[i][jj] = add_node(colatitude, azimuth);
    }
  }
  for (int i = 0; i <= n; ++i) {
    for (int jj = 0; jj <= n; ++jj) {
      if (jj == 0) {
        p3[i][jj] = p1[n - i][n];
        continue;
      }
      if (i == 0) {
        p3[i][jj] = p2[n][jj];
        continue;
      }
      const double azimuth = kPi / 4 + i * kPi / (4.0 * n);
      const double colatitude = a / 2 + jj * a / (2.0 * n);
      p3[i][jj] = add_node(colatitude, azimuth);
    }
  }

  auto emit_cells = [&](const Grid& g) {
    for (int i = 0; i < n; ++i) {
      for (int jj = 0; jj < n; ++jj) {
        mesh.elements.push_back(
            QuadElement{{g[i][jj], g[i + 1][jj], g[i + 1][jj + 1], g[i][jj + 1]}});
      }
    }
  };
  emit_cells(p1);
  emit_cells(p2);
  emit_cells(p3);
  orient_outward(mesh);

  auto& junction = mesh.edge_tags["junction"];
  auto& left = mesh.edge_tags["symmetry_left"];
  auto& right = mesh.edge_tags["symmetry_right"];
  for (int i = 0; i < n; ++i) {
    junction.push_back(sorted_edge(p2[i][n], p2[i + 1][n]));
    junction.push_back(sorted_edge(p3[i][n], p3[i + 1][n]));
    left.push_back(sorted_edge(p1[i][0], p1[i + 1][0]));
    left.push_back(sorted_edge(p2[0][i], p2[0][i + 1]));
    right.push_back(sorted_edge(p1[0][i], p1[0][i + 1]));
    right.push_back(sorted_edge(p3[n][i], p3[n][i + 1]));
  }
  tags_from_edges(mesh);
  return mesh;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d49bd125a60e3bULL;
  return x ^ (x >> 31);
}

double to_unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

double DomeGeometry::r0() const { return rho0 / std::sin(alpha); }

std::array<Eigen::Vector3d, 4> SurfaceMesh::corner_positions(int element) const {
  std::array<Eigen::Vector3d, 4> p;
  for (int k = 0; k < 4; ++k) p[k] = nodes[elements[element].nodes[k]].position;
  return p;
}

std::array<Eigen::Vector3d, 4> SurfaceMesh::corner_normals(int element) const {
  std::array<Eigen::Vector3d, 4> p;
  for (int k = 0; k < 4; ++k) p[k] = nodes[elements[element].nodes[k]].normal;
  return p;
}

bool SurfaceMesh::node_has_tag(const std::string& tag, int node) const {
  auto it = node_tags.find(tag);
  if (it == node_tags.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), node);
}

bool SurfaceMesh::node_tagged(int node) const {
  for (const auto& [name, nodes_in_tag] : node_tags) {
    if (std::binary_search(nodes_in_tag.begin(), nodes_in_tag.end(), node)) return true;
  }
  return false;
}

SurfaceMesh generate_quarter_cap_regular(int n, const DomeGeometry& geom) {
  if (n <= 0) throw std::invalid_argument("mesh subdivision must be positive");
  if (!(geom.alpha > 0.0 && geom.alpha < kPi / 2)) {
    throw std::invalid_argument("dome opening angle must lie in (0, pi/2)");
  }
  if (n == 1) return initial_cap_mesh(geom);
  if (n % 2 == 0) return refine(generate_quarter_cap_regular(n / 2, geom));
  return transfinite_cap_mesh(n, geom);
}

SurfaceMesh refine(const SurfaceMesh& mesh) {
  SurfaceMesh out;
  out.provenance = mesh.provenance;
  out.sphere_radius = mesh.sphere_radius;
  out.perturb_seed = mesh.perturb_seed;
  out.perturb_magnitude = mesh.perturb_magnitude;
  out.nodes = mesh.nodes;

  std::set<std::array<int, 2>> junction_edges;
  if (auto it = mesh.edge_tags.find("junction"); it != mesh.edge_tags.end()) {
    junction_edges.insert(it->second.begin(), it->second.end());
  }

  const double radius = mesh.sphere_radius;
  auto project = [&](const Eigen::Vector3d& p) {
    return mesh.has_analytic_surface() ? Eigen::Vector3d(radius * p.normalized()) : p;
  };

  std::map<std::array<int, 2>, int> edge_midpoint;
  auto midpoint_node = [&](int na, int nb) {
    const auto key = sorted_edge(na, nb);
    if (auto it = edge_midpoint.find(key); it != edge_midpoint.end()) return it->second;
    const Eigen::Vector3d pa = out.nodes[na].position;
    const Eigen::Vector3d pb = out.nodes[nb].position;
    Eigen::Vector3d p = 0.5 * (pa + pb);
    if (mesh.has_analytic_surface() && junction_edges.count(key) > 0) {
      // Keep refined junction nodes on the junction circle: preserve the
      // parents' height and bisect the azimuthal arc.
      const double z = 0.5 * (pa.z() + pb.z());
      const double rho = std::sqrt(std::max(radius * radius - z * z, 0.0));
      const Eigen::Vector3d horizontal(p.x(), p.y(), 0.0);
      p = rho * horizontal.normalized() + Eigen::Vector3d(0, 0, z);
    } else {
      p = project(p);
    }
    const int id = out.node_count();
    out.nodes.push_back(Node{id, p, p});
    edge_midpoint.emplace(key, id);
    return id;
  };

  for (const auto& element : mesh.elements) {
    const auto& en = element.nodes;
    const int m01 = midpoint_node(en[0], en[1]);
    const int m12 = midpoint_node(en[1], en[2]);
    const int m23 = midpoint_node(en[2], en[3]);
    const int m30 = midpoint_node(en[3], en[0]);
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int k = 0; k < 4; ++k) centroid += 0.25 * out.nodes[en[k]].position;
    const int mid = out.node_count();
    out.nodes.push_back(Node{mid, project(centroid), Eigen::Vector3d::UnitZ()});

    out.elements.push_back(QuadElement{{en[0], m01, mid, m30}});
    out.elements.push_back(QuadElement{{m01, en[1], m12, mid}});
    out.elements.push_back(QuadElement{{mid, m12, en[2], m23}});
    out.elements.push_back(QuadElement{{m30, mid, m23, en[3]}});
  }

  out.node_tags = mesh.node_tags;
  for (const auto& [name, edges] : mesh.edge_tags) {
    auto& child_edges = out.edge_tags[name];
    auto& tag_nodes = out.node_tags[name];
    for (const auto& e : edges) {
      const int m = edge_midpoint.at(e);
      child_edges.push_back(sorted_edge(e[0], m));
      child_edges.push_back(sorted_edge(m, e[1]));
      tag_nodes.push_back(m);
    }
    sort_unique(child_edges);
    sort_unique(tag_nodes);
  }

  if (mesh.has_analytic_surface()) {
    out = compute_nodal_normals(std::move(out), NormalMode::analytic);
  } else {
    out = compute_nodal_normals(std::move(out), NormalMode::averaged);
  }
  return out;
}

SurfaceMesh perturb(const SurfaceMesh& mesh, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0 && magnitude <= 0.4)) {
    throw std::invalid_argument("perturbation magnitude must lie in [0, 0.4]");
  }
  if (!mesh.has_analytic_surface()) {
    throw std::invalid_argument("perturb requires a mesh on an analytic sphere");
  }

  SurfaceMesh out = mesh;
  out.provenance = Provenance::perturbed;
  out.perturb_seed = seed;
  out.perturb_magnitude = magnitude;
  if (magnitude == 0.0) return out;

  // Shortest incident edge per node, from the unperturbed mesh.
  std::vector<double> local_h(mesh.nodes.size(), std::numeric_limits<double>::max());
  for (const auto& element : mesh.elements) {
    for (int k = 0; k < 4; ++k) {
      const int a = element.nodes[k];
      const int b = element.nodes[(k + 1) % 4];
      const double len = (mesh.nodes[a].position - mesh.nodes[b].position).norm();
      local_h[a] = std::min(local_h[a], len);
      local_h[b] = std::min(local_h[b], len);
    }
  }

  const double radius = mesh.sphere_radius;
  for (auto& node : out.nodes) {
    if (mesh.node_tagged(node.id)) continue;
    const std::uint64_t s0 = splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (node.id + 1)));
    const std::uint64_t s1 = splitmix64(s0);
    const double angle = 2.0 * kPi * to_unit_double(s0);
    const double rho = magnitude * local_h[node.id] * to_unit_double(s1);

    const Eigen::Vector3d n = node.normal;
    Eigen::Vector3d t1 = Eigen::Vector3d::UnitZ().cross(n);
    if (t1.norm() < 1e-8) t1 = Eigen::Vector3d::UnitX().cross(n);
    t1.normalize();
    const Eigen::Vector3d t2 = n.cross(t1);

    node.position += rho * (std::cos(angle) * t1 + std::sin(angle) * t2);
    node.position = radius * node.position.normalized();
  }
  out = compute_nodal_normals(std::move(out), NormalMode::analytic);

  for (int e = 0; e < out.element_count(); ++e) {
    if (!element_is_convex(out.corner_positions(e))) {
      throw GeometryError("perturbation produced a non-convex element " + std::to_string(e));
    }
  }
  return out;
}

SurfaceMesh compute_nodal_normals(SurfaceMesh mesh, NormalMode mode) {
  if (mode == NormalMode::analytic) {
    if (!mesh.has_analytic_surface()) {
      throw std::invalid_argument("analytic normals require an analytic sphere surface");
    }
    for (auto& node : mesh.nodes) node.normal = node.position.normalized();
    return mesh;
  }
  std::vector<Eigen::Vector3d> acc(mesh.nodes.size(), Eigen::Vector3d::Zero());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Eigen::Vector3d n = facet_normal(mesh.corner_positions(e));
    for (int k = 0; k < 4; ++k) acc[mesh.elements[e].nodes[k]] += n;
  }
  for (auto& node : mesh.nodes) {
    const double len = acc[node.id].norm();
    if (len < 1e-12) {
      throw GeometryError("degenerate normal fan at node " + std::to_string(node.id));
    }
    node.normal = acc[node.id] / len;
  }
  return mesh;
}

std::map<std::array<int, 2>, std::vector<int>> edge_to_elements(const SurfaceMesh& mesh) {
  std::map<std::array<int, 2>, std::vector<int>> adjacency;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& en = mesh.elements[e].nodes;
    for (int k = 0; k < 4; ++k) {
      adjacency[sorted_edge(en[k], en[(k + 1) % 4])].push_back(e);
    }
  }
  return adjacency;
}

std::vector<std::array<int, 2>> boundary_edges(const SurfaceMesh& mesh) {
  std::vector<std::array<int, 2>> result;
  for (const auto& [edge, elements] : edge_to_elements(mesh)) {
    if (elements.size() == 1) result.push_back(edge);
  }
  return result;
}

bool element_is_convex(const std::array<Eigen::Vector3d, 4>& corners) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : corners) centroid += 0.25 * p;
  const Eigen::Vector3d n = (corners[2] - corners[0]).cross(corners[3] - corners[1]);
  const double nn = n.norm();
  if (!(nn > 0.0)) return false;
  const Eigen::Vector3d i3 = n / nn;
  Eigen::Vector3d i1 = corners[1] - corners[0];
  i1 -= i1.dot(i3) * i3;
  if (i1.norm() == 0.0) return false;
  i1.normalize();
  const Eigen::Vector3d i2 = i3.cross(i1);

  std::array<Eigen::Vector2d, 4> q;
  double scale = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector3d d = corners[k] - centroid;
    q[k] = Eigen::Vector2d(d.dot(i1), d.dot(i2));
    scale = std::max(scale, q[k].norm());
  }
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector2d to_next = q[(k + 1) % 4] - q[k];
    const Eigen::Vector2d to_prev = q[(k + 3) % 4] - q[k];
    // corner Jacobian of the bilinear map, up to a positive factor
    const double det = to_next.x() * to_prev.y() - to_next.y() * to_prev.x();
    if (!(det > 1e-12 * scale * scale)) return false;
  }
  return true;
}

void validate_mesh(const SurfaceMesh& mesh, bool require_full_boundary_tags) {
  for (const auto& node : mesh.nodes) {
    if (std::abs(node.normal.norm() - 1.0) > 1e-12) {
      throw GeometryError("non-unit normal at node " + std::to_string(node.id));
    }
  }
  std::map<std::array<int, 2>, int> directed;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& en = mesh.elements[e].nodes;
    std::set<int> distinct(en.begin(), en.end());
    if (distinct.size() != 4) throw GeometryError("repeated node in element " + std::to_string(e));
    for (int id : en) {
      if (id < 0 || id >= mesh.node_count()) {
        throw GeometryError("node id out of range in element " + std::to_string(e));
      }
    }
    if (!element_is_convex(mesh.corner_positions(e))) {
      throw GeometryError("non-convex element " + std::to_string(e));
    }
    for (int k = 0; k < 4; ++k) {
      const auto inserted = directed.emplace(std::array<int, 2>{en[k], en[(k + 1) % 4]}, e);
      if (!inserted.second) {
        throw GeometryError("inconsistent orientation at element " + std::to_string(e));
      }
    }
  }
  const auto adjacency = edge_to_elements(mesh);
  std::map<std::array<int, 2>, int> tag_cover;
  for (const auto& [name, edges] : mesh.edge_tags) {
    for (const auto& e : edges) {
      auto it = adjacency.find(e);
      if (it == adjacency.end() || it->second.size() != 1) {
        throw GeometryError("tag '" + name + "' contains a non-boundary edge");
      }
      tag_cover[e] += 1;
    }
  }
  if (require_full_boundary_tags) {
    for (const auto& edge : boundary_edges(mesh)) {
      auto it = tag_cover.find(edge);
      if (it == tag_cover.end() || it->second != 1) {
        throw GeometryError("boundary edge is not covered by exactly one tag");
      }
    }
  }
}

}  // namespace shellbench
