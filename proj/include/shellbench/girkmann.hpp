#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shellbench/assembly.hpp"

namespace shellbench {

// Problem data: spherical concrete dome of opening angle alpha stiffened by a
// pentagonal foot ring, loaded by its own weight.
struct GirkmannConstants {
  double rho0 = 15.0;                    // m, junction circle radius
  double alpha = 0.6981317007977318;     // rad (40 degrees)
  double thickness = 0.06;               // m
  double weight_density = 32690.0;       // N/m^3
  double youngs_modulus = 20.59e9;       // Pa
  double poisson_ratio = 0.0;
  double ring_width = 0.60;              // m, base width
  double ring_outer_height = 0.50;       // m, outer face height

  double r0() const;
  double surface_load() const;  // g = F t, N/m^2
  DomeGeometry dome() const;
  Material material() const;
};

// Membrane normal force transmitted at the junction: N0 = -g r0 / (1 + cos alpha).
double normal_force(const GirkmannConstants& constants);

// The six constants of the junction relations
//   E Lambda = E Lambda0 + k11 R + k12 M,
//   E Psi    = E Psi0    + k21 R + k22 M.
// Sign conventions: Lambda positive outward, Psi positive about the
// horizontal circumferential direction z x e_rho, R positive pulling the
// shell edge outward, M following the classical splitting (which makes
// k12 = -k21 rather than a symmetric pair).
struct ComplianceSet {
  double e_lambda0 = 0.0;  // N/m
  double k11 = 0.0;        // dimensionless
  double k12 = 0.0;        // 1/m
  double e_psi0 = 0.0;     // N/m^2
  double k21 = 0.0;        // 1/m
  double k22 = 0.0;        // 1/m^2
};

// Reference values of the axisymmetric shell solution and of the ring model
// from the benchmark literature; used for normalization and as test oracles.
ComplianceSet reference_shell_compliance();
ComplianceSet reference_ring_compliance();

// Rigid-cross-section ring model: pentagon in (rho, z), junction midpoint at
// (rho0, 0), 2x2 hoop-stiffness over (Lambda, Psi) integrated exactly over
// the pentagon, plus the Case-1 load pair (junction reaction and the
// equilibrating base pressure).
struct RingModel {
  std::array<Eigen::Vector2d, 5> vertices;  // counter-clockwise in (rho, z)
  Eigen::Vector2d junction = Eigen::Vector2d::Zero();
  Eigen::Matrix2d stiffness = Eigen::Matrix2d::Zero();  // E-scaled, per unit length
  Eigen::Vector2d case1_load = Eigen::Vector2d::Zero();  // generalized (Lambda, Psi) forces
  double base_pressure = 0.0;  // Pa
};

RingModel build_ring_model(const GirkmannConstants& constants);
ComplianceSet ring_compliance(const GirkmannConstants& constants, RingModel* model = nullptr);

struct ReactionResult {
  double horizontal_force = 0.0;  // R, N/m
  double moment = 0.0;            // M, N*m/m
  double shear_force = 0.0;       // Q = R / sin alpha, N/m
};

ReactionResult solve_reactions(const ComplianceSet& shell, const ComplianceSet& ring,
                               double alpha = GirkmannConstants{}.alpha);

// Assembles and factorizes the shell problem once, then serves the benchmark
// load cases from the shared factorization.
class BenchmarkPipeline {
 public:
  BenchmarkPipeline(SurfaceMesh mesh, Formulation formulation, GirkmannConstants constants);

  const SurfaceMesh& mesh() const { return mesh_; }
  const DofMap& dof_map() const { return dofs_; }
  const GirkmannConstants& constants() const { return constants_; }

  // Case 1: gravity + membrane edge force, Case 2: R = 1 N/m,
  // Case 3: M = 1 N*m/m. Solutions are cached.
  const Solution& case_solution(int case_id);
  // Case 4: gravity, membrane edge force and the solved reactions.
  Solution case4(const ReactionResult& reactions);
  // Case loads with explicit reaction scales (case 4 with r_scale=m_scale=0
  // reduces to case 1); exposed for the superposition identities.
  Solution solve_with_reactions(double r_scale, double m_scale, bool include_gravity);

  ComplianceSet shell_compliance();
  JunctionAverages junction(const Solution& solution) const;
  double max_residual() const { return max_residual_; }

 private:
  LoadSpec loads(double gravity_scale, double r_scale, double m_scale) const;

  SurfaceMesh mesh_;
  Formulation formulation_;
  GirkmannConstants constants_;
  DofMap dofs_;
  std::unique_ptr<FactorizedSystem> factorization_;
  std::map<int, Solution> cache_;
  double max_residual_ = 0.0;
};

Solution run_case(const SurfaceMesh& mesh, const Formulation& formulation, int case_id,
                  const GirkmannConstants& constants,
                  const std::optional<ReactionResult>& reactions = std::nullopt);
ComplianceSet shell_compliance(const SurfaceMesh& mesh, const Formulation& formulation,
                               const GirkmannConstants& constants);

// Meridional bending moment along one symmetry edge, evaluated per boundary
// element at the edge midpoint from the unprojected bending operator; sorted
// by colatitude and restricted to [20, 40] degrees.
enum class ProfileEdge { left, right };
struct ProfilePoint {
  double colatitude_deg = 0.0;
  double m11 = 0.0;  // N*m/m
};
std::vector<ProfilePoint> moment_profile(const SurfaceMesh& mesh, const DofMap& dofs,
                                         const Material& material, const Solution& solution,
                                         ProfileEdge edge);

double total_variation(const std::vector<ProfilePoint>& profile);

// Loss-of-axisymmetry metric: max relative deviation of the junction nodes'
// total displacement from their circumferential mean.
double symmetry_deviation(const SurfaceMesh& mesh, const DofMap& dofs, const Solution& solution);

// Normalized compliance table over a mesh sequence.
struct ConvergenceRow {
  std::string formulation;
  int n = 0;
  std::string quantity;
  double raw = 0.0;
  double normalized = 0.0;
};

struct MeshFamily {
  enum class Kind { regular, perturbed } kind = Kind::regular;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

// Benchmark meshes are indexed by the convergence-table N, the number of
// elements per boundary edge of the quarter model (the regular refinement of
// the 3-element initial mesh gives N = 2, 4, 8, ...). The quarter-cap
// generator counts per-patch subdivisions, which is half of that.
SurfaceMesh benchmark_mesh(int n, const GirkmannConstants& constants,
                           const MeshFamily& family = {});

std::vector<ConvergenceRow> convergence_table(const GirkmannConstants& constants,
                                              const std::vector<Formulation>& formulations,
                                              const std::vector<int>& n_values,
                                              const MeshFamily& family,
                                              unsigned max_threads = 0);

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out);
void write_profile_csv(const std::vector<ProfilePoint>& profile, std::ostream& out);

}  // namespace shellbench
