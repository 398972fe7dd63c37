#include "shellbench/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shellbench/errors.hpp"

namespace shellbench {

namespace {

std::array<int, 2> sorted_edge(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

Eigen::Matrix<double, 20, 20> element_transform(const SurfaceMesh& mesh, const DofMap& dofs,
                                                const ElementGeometry& geom, int element) {
  Eigen::Matrix<double, 20, 20> t = Eigen::Matrix<double, 20, 20>::Zero();
  for (int k = 0; k < 4; ++k) {
    const int node = mesh.elements[element].nodes[k];
    t.block<5, 5>(5 * k, 5 * k) = nodal_dof_transform(geom.frame, dofs.frames[node]);
  }
  return t;
}

}  // namespace

std::vector<NodalFrame> default_nodal_frames(const SurfaceMesh& mesh) {
  std::vector<NodalFrame> frames(mesh.nodes.size());
  for (const auto& node : mesh.nodes) {
    NodalFrame f;
    f.n = node.normal;
    Eigen::Vector3d g2 = Eigen::Vector3d::UnitZ().cross(f.n);
    if (g2.norm() < 1e-10) {
      Eigen::Vector3d g1 = Eigen::Vector3d::UnitX();
      g1 -= g1.dot(f.n) * f.n;
      f.g1 = g1.normalized();
      f.g2 = f.n.cross(f.g1);
    } else {
      f.g2 = g2.normalized();
      f.g1 = f.g2.cross(f.n);
    }
    frames[node.id] = f;
  }
  return frames;
}

DofMap build_dof_map(const SurfaceMesh& mesh, const SymmetryPlanes& planes) {
  return build_dof_map(mesh, planes, default_nodal_frames(mesh));
}

DofMap build_dof_map(const SurfaceMesh& mesh, const SymmetryPlanes& planes,
                     std::vector<NodalFrame> frames) {
  if (frames.size() != mesh.nodes.size()) {
    throw std::invalid_argument("frame count does not match node count");
  }

  // Collect the symmetry planes constraining each node.
  std::vector<std::vector<Eigen::Vector3d>> node_planes(mesh.nodes.size());
  for (const auto& [tag, normal] : planes.plane_normals) {
    auto it = mesh.node_tags.find(tag);
    if (it == mesh.node_tags.end()) continue;
    for (int node : it->second) node_planes[node].push_back(normal.normalized());
  }

  DofMap dofs;
  dofs.frames = std::move(frames);
  dofs.index.assign(mesh.nodes.size(), {-1, -1, -1, -1, -1});
  int next = 0;
  for (const auto& node : mesh.nodes) {
    auto& frame = dofs.frames[node.id];
    const auto& constraints = node_planes[node.id];
    std::array<bool, 5> eliminated{false, false, false, false, false};

    if (constraints.size() == 1) {
      Eigen::Vector3d in_plane = constraints[0] - constraints[0].dot(frame.n) * frame.n;
      if (in_plane.norm() < 1e-8) {
        throw ConstraintError("symmetry plane is tangent to the surface at node " +
                              std::to_string(node.id));
      }
      in_plane.normalize();
      if (in_plane.dot(frame.g2) < 0.0) in_plane = -in_plane;
      frame.g2 = in_plane;
      frame.g1 = frame.g2.cross(frame.n);
      eliminated[1] = eliminated[4] = true;  // u2 and theta2
    } else if (constraints.size() >= 2) {
      // The tangential directions of two distinct planes span the tangent
      // plane (pole of the quarter model): pin u and theta fully.
      Eigen::Vector3d first = constraints[0] - constraints[0].dot(frame.n) * frame.n;
      Eigen::Vector3d second = constraints[1] - constraints[1].dot(frame.n) * frame.n;
      if (first.norm() < 1e-8 || second.norm() < 1e-8 ||
          first.normalized().cross(second.normalized()).norm() < 1e-8) {
        throw ConstraintError("conflicting symmetry planes at node " + std::to_string(node.id));
      }
      eliminated[0] = eliminated[1] = eliminated[3] = eliminated[4] = true;
    }

    for (int k = 0; k < 5; ++k) {
      if (!eliminated[k]) dofs.index[node.id][k] = next++;
    }
  }
  dofs.n_dofs = next;
  return dofs;
}

Eigen::SparseMatrix<double> assemble_stiffness(const SurfaceMesh& mesh, const DofMap& dofs,
                                               const Formulation& formulation,
                                               const Material& material) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.element_count()) * 210);

  for (int e = 0; e < mesh.element_count(); ++e) {
    ElementMatrices local;
    ElementGeometry geom;
    try {
      geom = straighten_element(mesh.corner_positions(e));
      local = element_stiffness(formulation, geom, mesh.corner_normals(e), material);
    } catch (const GeometryError& error) {
      throw GeometryError(std::string(error.what()) + " (element " + std::to_string(e) + ")");
    }
    const Eigen::Matrix<double, 20, 20> t = element_transform(mesh, dofs, geom, e);
    const Eigen::Matrix<double, 20, 20> k_nodal = t.transpose() * local.stiffness * t;

    std::array<int, 20> global;
    for (int k = 0; k < 4; ++k) {
      const int node = mesh.elements[e].nodes[k];
      for (int c = 0; c < 5; ++c) global[5 * k + c] = dofs.index[node][c];
    }
    for (int r = 0; r < 20; ++r) {
      if (global[r] < 0) continue;
      for (int c = 0; c < 20; ++c) {
        if (global[c] < 0 || global[c] > global[r]) continue;  // lower triangle
        triplets.emplace_back(global[r], global[c], k_nodal(r, c));
      }
    }
  }

  Eigen::SparseMatrix<double> stiffness(dofs.n_dofs, dofs.n_dofs);
  stiffness.setFromTriplets(triplets.begin(), triplets.end());
  return stiffness;
}

Eigen::VectorXd assemble_load(const SurfaceMesh& mesh, const DofMap& dofs, const LoadSpec& loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs.n_dofs);

  auto scatter = [&](int element, const Eigen::Matrix<double, 20, 1>& local,
                     const ElementGeometry& geom) {
    const Eigen::Matrix<double, 20, 20> t = element_transform(mesh, dofs, geom, element);
    const Eigen::Matrix<double, 20, 1> nodal = t.transpose() * local;
    for (int k = 0; k < 4; ++k) {
      const int node = mesh.elements[element].nodes[k];
      for (int c = 0; c < 5; ++c) {
        const int g = dofs.index[node][c];
        if (g >= 0) f(g) += nodal(5 * k + c);
      }
    }
  };

  if (loads.surface_force_density.norm() > 0.0) {
    SurfaceLoad surface;
    surface.global_force_density = loads.surface_force_density;
    for (int e = 0; e < mesh.element_count(); ++e) {
      const ElementGeometry geom = straighten_element(mesh.corner_positions(e));
      scatter(e, element_load(geom, surface), geom);
    }
  }
  if (loads.surface_force_field) {
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto corners = mesh.corner_positions(e);
      const ElementGeometry geom = straighten_element(corners);
      scatter(e, element_load_field(geom, corners, loads.surface_force_field), geom);
    }
  }

  // Line loads integrate against the nodal-frame trace of the displacement:
  // with exact junction normals the membrane edge pull then carries no
  // spurious transverse component (decomposing through the tilted element
  // frame instead would commit an O(h_K / R) consistency error).
  auto add_nodal = [&](int node, const Eigen::Vector3d& force, const Eigen::Vector3d& moment,
                       double weight) {
    const NodalFrame& frame = dofs.frames[node];
    const std::array<double, 5> components{
        force.dot(frame.g1), force.dot(frame.g2), force.dot(frame.n),
        moment.dot(frame.g2), -moment.dot(frame.g1)};
    for (int c = 0; c < 5; ++c) {
      const int g = dofs.index[node][c];
      if (g >= 0) f(g) += weight * components[c];
    }
  };
  for (const auto& edge_load : loads.edge_loads) {
    auto it = mesh.edge_tags.find(edge_load.tag);
    if (it == mesh.edge_tags.end()) {
      throw std::invalid_argument("edge load references unknown tag '" + edge_load.tag + "'");
    }
    for (const auto& edge : it->second) {
      const Eigen::Vector3d mid =
          0.5 * (mesh.nodes[edge[0]].position + mesh.nodes[edge[1]].position);
      const Eigen::Vector3d half =
          0.5 * (mesh.nodes[edge[1]].position - mesh.nodes[edge[0]].position);
      const double measure = half.norm();
      for (const double s : {-kGaussPoint, kGaussPoint}) {
        const Eigen::Vector3d p = mid + s * half;
        const Eigen::Vector3d force =
            edge_load.force ? edge_load.force(p) : Eigen::Vector3d::Zero();
        const Eigen::Vector3d moment =
            edge_load.moment ? edge_load.moment(p) : Eigen::Vector3d::Zero();
        add_nodal(edge[0], force, moment, measure * 0.5 * (1.0 - s));
        add_nodal(edge[1], force, moment, measure * 0.5 * (1.0 + s));
      }
    }
  }
  return f;
}

GlobalSystem assemble(const SurfaceMesh& mesh, const DofMap& dofs, const Formulation& formulation,
                      const Material& material, const LoadSpec& loads) {
  GlobalSystem system;
  system.stiffness = assemble_stiffness(mesh, dofs, formulation, material);
  system.load = assemble_load(mesh, dofs, loads);
  system.n_dofs = dofs.n_dofs;
  return system;
}

FactorizedSystem::FactorizedSystem(Eigen::SparseMatrix<double> stiffness_lower)
    : stiffness_(std::move(stiffness_lower)) {
  ldlt_.compute(stiffness_);
  if (ldlt_.info() != Eigen::Success) {
    throw SolverError("sparse LDLT factorization failed (matrix not positive definite?)");
  }
}

Eigen::VectorXd FactorizedSystem::raw_solve(const Eigen::VectorXd& rhs) const {
  const auto spd = stiffness_.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd x = ldlt_.solve(rhs);
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Eigen::VectorXd r = rhs - spd * x;
    if (r.norm() <= 1e-16 * rhs.norm()) break;
    x += ldlt_.solve(r);
  }
  return x;
}

void FactorizedSystem::deflate(const Eigen::MatrixXd& modes) {
  modes_ = modes;
  mode_response_.resize(modes.rows(), modes.cols());
  for (int m = 0; m < modes.cols(); ++m) mode_response_.col(m) = raw_solve(modes.col(m));
  mode_gram_ = modes_.transpose() * mode_response_;
}

Eigen::VectorXd FactorizedSystem::solve(const Eigen::VectorXd& rhs, double* residual) const {
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    if (residual) *residual = 0.0;
    return Eigen::VectorXd::Zero(rhs.size());
  }
  const auto spd = stiffness_.selfadjointView<Eigen::Lower>();
  const double matrix_norm = Eigen::VectorXd(stiffness_.cwiseAbs() *
                                             Eigen::VectorXd::Ones(stiffness_.cols()))
                                 .maxCoeff();

  // pin the neutral-mode amplitudes: x <- x - K^-1 Phi (Phi^T K^-1 Phi)^-1 Phi^T x;
  // corrections are projected the same way inside the refinement loop, so the
  // huge neutral-mode response never limits the attainable accuracy
  auto pin_modes = [&](Eigen::VectorXd& v) {
    if (modes_.cols() == 0) return;
    const Eigen::VectorXd amplitudes =
        mode_gram_.ldlt().solve(Eigen::VectorXd(modes_.transpose() * v));
    v -= mode_response_ * amplitudes;
  };
  // the residual of the pinned solution contains the mode reactions; measure
  // it in the quotient space
  auto quotient = [&](Eigen::VectorXd& r) {
    if (modes_.cols() == 0) return;
    r -= modes_ * (modes_.transpose() * modes_)
                      .ldlt()
                      .solve(Eigen::VectorXd(modes_.transpose() * r));
  };

  Eigen::VectorXd x = ldlt_.solve(rhs);
  pin_modes(x);
  double rel = 0.0, backward = 0.0;
  for (int sweep = 0; sweep < 4; ++sweep) {
    Eigen::VectorXd r = rhs - spd * x;
    quotient(r);
    rel = r.norm() / rhs_norm;
    backward = r.norm() / (matrix_norm * x.norm() + rhs_norm);
    if (backward <= 1e-15) break;
    Eigen::VectorXd correction = ldlt_.solve(r);
    pin_modes(correction);
    x += correction;
  }
  // the attainable load-relative residual is bounded below by
  // eps * |K| |x| / |f|, so convergence is judged by the backward error
  if (!(backward <= 1e-12)) {
    throw SolverError("solver backward error " + std::to_string(backward) + " exceeds 1e-12");
  }
  if (residual) *residual = rel;
  return x;
}

Eigen::VectorXd translation_mode(const SurfaceMesh& mesh, const DofMap& dofs,
                                 const Eigen::Vector3d& direction) {
  Eigen::VectorXd mode = Eigen::VectorXd::Zero(dofs.n_dofs);
  for (int node = 0; node < mesh.node_count(); ++node) {
    const auto& frame = dofs.frames[node];
    const std::array<double, 3> components{direction.dot(frame.g1), direction.dot(frame.g2),
                                           direction.dot(frame.n)};
    for (int c = 0; c < 3; ++c) {
      const int g = dofs.index[node][c];
      if (g >= 0) mode(g) = components[c];
    }
  }
  return mode;
}

Solution expand_solution(const Eigen::VectorXd& packed, const DofMap& dofs, double residual) {
  Solution solution;
  solution.n_dofs = dofs.n_dofs;
  solution.residual = residual;
  solution.nodal = Eigen::VectorXd::Zero(5 * dofs.node_count());
  for (int node = 0; node < dofs.node_count(); ++node) {
    for (int c = 0; c < 5; ++c) {
      const int g = dofs.index[node][c];
      if (g >= 0) solution.nodal(5 * node + c) = packed(g);
    }
  }
  return solution;
}

Solution solve(const GlobalSystem& system, const DofMap& dofs) {
  FactorizedSystem factorization(system.stiffness);
  double residual = 0.0;
  const Eigen::VectorXd x = factorization.solve(system.load, &residual);
  return expand_solution(x, dofs, residual);
}

Eigen::Vector3d Solution::displacement(const DofMap& dofs, int node) const {
  const auto d = at(node);
  const auto& f = dofs.frames[node];
  return d(0) * f.g1 + d(1) * f.g2 + d(2) * f.n;
}

Eigen::Vector3d Solution::rotation(const DofMap& dofs, int node) const {
  const auto d = at(node);
  const auto& f = dofs.frames[node];
  // tilt theta_l g_l corresponds to the rotation vector n x tilt
  return d(3) * f.g2 - d(4) * f.g1;
}

JunctionAverages junction_averages(const SurfaceMesh& mesh, const DofMap& dofs,
                                   const Solution& solution) {
  auto it = mesh.node_tags.find("junction");
  if (it == mesh.node_tags.end() || it->second.empty()) {
    throw std::invalid_argument("mesh has no junction-tagged nodes");
  }
  JunctionAverages averages;
  for (int node : it->second) {
    const Eigen::Vector3d p = mesh.nodes[node].position;
    const Eigen::Vector3d radial = Eigen::Vector3d(p.x(), p.y(), 0.0).normalized();
    const Eigen::Vector3d circumferential = Eigen::Vector3d::UnitZ().cross(radial);
    averages.lambda += solution.displacement(dofs, node).dot(radial);
    averages.psi += solution.rotation(dofs, node).dot(circumferential);
  }
  const double count = static_cast<double>(it->second.size());
  averages.lambda /= count;
  averages.psi /= count;
  return averages;
}

}  // namespace shellbench
