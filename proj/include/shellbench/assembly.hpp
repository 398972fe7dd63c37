#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shellbench/element.hpp"
#include "shellbench/mesh.hpp"

namespace shellbench {

// Symmetry planes through the origin, keyed by the edge tag they constrain.
// For each tagged node the in-plane displacement and rotation components
// along the plane normal (projected to the tangent plane) are eliminated.
// Note the quarter model keeps a neutral vertical rigid mode (the benchmark
// edge loads are equilibrated); solvers deflate it, see FactorizedSystem.
struct SymmetryPlanes {
  std::map<std::string, Eigen::Vector3d> plane_normals;
  static SymmetryPlanes quarter_model() {
    return {{{"symmetry_left", Eigen::Vector3d::UnitY()},
             {"symmetry_right", Eigen::Vector3d::UnitX()}}};
  }
};

// Node -> 5 global indices (-1 for eliminated components) plus the nodal
// tangent frame in which those degrees of freedom are expressed. Constrained
// nodes have their frame rotated so that g2 spans the eliminated direction.
struct DofMap {
  std::vector<NodalFrame> frames;
  std::vector<std::array<int, 5>> index;
  int n_dofs = 0;

  int node_count() const { return static_cast<int>(frames.size()); }
};

// Default frames: g2 along the horizontal circumferential direction z x n,
// g1 = g2 x n (meridian); falls back to a projection of the x axis near the
// pole. (g1, g2, n) is right-handed.
std::vector<NodalFrame> default_nodal_frames(const SurfaceMesh& mesh);

DofMap build_dof_map(const SurfaceMesh& mesh,
                     const SymmetryPlanes& planes = SymmetryPlanes::quarter_model());
DofMap build_dof_map(const SurfaceMesh& mesh, const SymmetryPlanes& planes,
                     std::vector<NodalFrame> frames);

// Loads for one assembled system: an optional global surface force density
// plus line loads along tagged boundary edges. Force and moment densities are
// evaluated at physical edge points.
struct LoadSpec {
  Eigen::Vector3d surface_force_density = Eigen::Vector3d::Zero();  // N/m^2
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> surface_force_field;  // N/m^2
  struct EdgeLoad {
    std::string tag;
    std::function<Eigen::Vector3d(const Eigen::Vector3d&)> force;   // N/m
    std::function<Eigen::Vector3d(const Eigen::Vector3d&)> moment;  // N*m/m
  };
  std::vector<EdgeLoad> edge_loads;
};

struct GlobalSystem {
  Eigen::SparseMatrix<double> stiffness;  // lower triangle
  Eigen::VectorXd load;
  int n_dofs = 0;
};

Eigen::SparseMatrix<double> assemble_stiffness(const SurfaceMesh& mesh, const DofMap& dofs,
                                               const Formulation& formulation,
                                               const Material& material);
Eigen::VectorXd assemble_load(const SurfaceMesh& mesh, const DofMap& dofs, const LoadSpec& loads);
GlobalSystem assemble(const SurfaceMesh& mesh, const DofMap& dofs, const Formulation& formulation,
                      const Material& material, const LoadSpec& loads);

// Nodal-frame solution, 5 values per node with eliminated components at zero.
struct Solution {
  Eigen::VectorXd nodal;
  double residual = 0.0;  // |Kx-f| / |f|
  int n_dofs = 0;

  Eigen::Matrix<double, 5, 1> at(int node) const { return nodal.segment<5>(5 * node); }
  Eigen::Vector3d displacement(const DofMap& dofs, int node) const;
  // rotation pseudo-vector of the normal tilt
  Eigen::Vector3d rotation(const DofMap& dofs, int node) const;
};

// Sparse symmetric factorization kept alive for repeated right-hand sides;
// solutions are refined to near machine precision residuals.
//
// Neutral (zero-stiffness up to discretization) rigid modes can be deflated:
// solutions are then constrained to zero amplitude along the given dof
// patterns, which is the Lagrange-multiplier solution computed through the
// factorization (the reported residual is measured in the quotient space).
class FactorizedSystem {
 public:
  explicit FactorizedSystem(Eigen::SparseMatrix<double> stiffness_lower);
  void deflate(const Eigen::MatrixXd& modes);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double* residual = nullptr) const;
  int n_dofs() const { return static_cast<int>(stiffness_.rows()); }

 private:
  Eigen::VectorXd raw_solve(const Eigen::VectorXd& rhs) const;

  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
  Eigen::MatrixXd modes_;          // dof patterns held at zero amplitude
  Eigen::MatrixXd mode_response_;  // K^-1 modes
  Eigen::MatrixXd mode_gram_;      // modes^T K^-1 modes
};

// Rigid-translation dof pattern (u, w components of a global direction,
// rotations zero) in the constrained dof numbering.
Eigen::VectorXd translation_mode(const SurfaceMesh& mesh, const DofMap& dofs,
                                 const Eigen::Vector3d& direction);

Solution solve(const GlobalSystem& system, const DofMap& dofs);
Solution expand_solution(const Eigen::VectorXd& packed, const DofMap& dofs, double residual);

// Junction means: horizontal radial displacement and the rotation about the
// junction circle tangent, averaged over the tagged nodes.
struct JunctionAverages {
  double lambda = 0.0;  // m
  double psi = 0.0;     // rad
};
JunctionAverages junction_averages(const SurfaceMesh& mesh, const DofMap& dofs,
                                   const Solution& solution);

}  // namespace shellbench
