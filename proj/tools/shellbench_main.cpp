// Command-line front end: mesh generation/import, the stiffened-dome
// benchmark pipeline, and compliance convergence tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shellbench/errors.hpp"
#include "shellbench/girkmann.hpp"
#include "shellbench/msh_io.hpp"

namespace {

using namespace shellbench;

constexpr int kExitSolver = 1;
constexpr int kExitInput = 2;
constexpr int kExitGeometry = 3;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// no partial output files: write to a temporary and rename into place
void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path temporary = path.string() + ".tmp";
  {
    std::ofstream out(temporary);
    if (!out) throw std::invalid_argument("cannot open output file: " + temporary.string());
    out << contents;
  }
  std::filesystem::rename(temporary, path);
}

struct MeshChoice {
  MeshFamily family;
  std::string import_path;  // non-empty for file meshes
};

MeshChoice parse_mesh_choice(const std::string& mesh, double magnitude, std::uint64_t seed) {
  MeshChoice choice;
  if (mesh == "regular") {
    choice.family.kind = MeshFamily::Kind::regular;
  } else if (mesh == "perturbed") {
    choice.family.kind = MeshFamily::Kind::perturbed;
    choice.family.magnitude = magnitude;
    choice.family.seed = seed;
  } else {
    choice.import_path = mesh;
  }
  return choice;
}

SurfaceMesh load_mesh_file(const std::string& path) {
  SurfaceMesh mesh = parse_msh_file(path);
  const std::filesystem::path sidecar = std::filesystem::path(path).replace_extension(".normals");
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    mesh = apply_normals_sidecar(std::move(mesh), in);
  }
  return mesh;
}

Formulation parse_formulation(const std::string& name, const std::optional<double>& alpha) {
  Formulation formulation;
  if (name == "disp4") {
    formulation = Formulation::disp4();
  } else if (name == "mitc4c") {
    formulation = Formulation::mitc4c();
  } else if (name == "mitc4s") {
    formulation = Formulation::mitc4s();
  } else {
    throw CLI::ValidationError("--formulation", "unknown formulation '" + name + "'");
  }
  if (alpha) {
    if (!(*alpha > 0.0)) {
      throw CLI::ValidationError("--stabilize", "stabilization parameter must be positive");
    }
    formulation = formulation.stabilized(*alpha);
  }
  return formulation;
}

int run_mesh_command(int n, double magnitude, std::uint64_t seed, const std::string& import_path,
                     const std::string& out_dir) {
  const GirkmannConstants constants;
  SurfaceMesh mesh;
  if (!import_path.empty()) {
    mesh = load_mesh_file(import_path);
    validate_mesh(mesh, /*require_full_boundary_tags=*/false);
  } else {
    mesh = generate_quarter_cap_regular(n, constants.dome());
    if (magnitude > 0.0) mesh = perturb(mesh, magnitude, seed);
    validate_mesh(mesh);
  }

  std::filesystem::create_directories(out_dir);
  std::ostringstream mesh_text, normals_text;
  write_msh(mesh, mesh_text);
  write_normals_sidecar(mesh, normals_text);
  const std::filesystem::path base(out_dir);
  write_file_atomically(base / "mesh.msh", mesh_text.str());
  write_file_atomically(base / "mesh.normals", normals_text.str());
  std::cout << "wrote " << (base / "mesh.msh").string() << " (" << mesh.element_count()
            << " elements, " << mesh.node_count() << " nodes)\n";
  return 0;
}

int run_benchmark_command(const Formulation& formulation, int n, const std::string& mesh_arg,
                          double magnitude, std::uint64_t seed, const std::string& out_dir) {
  const GirkmannConstants constants;
  const MeshChoice choice = parse_mesh_choice(mesh_arg, magnitude, seed);
  SurfaceMesh mesh = choice.import_path.empty()
                         ? benchmark_mesh(n, constants, choice.family)
                         : load_mesh_file(choice.import_path);

  BenchmarkPipeline pipeline(std::move(mesh), formulation, constants);
  const ComplianceSet shell = pipeline.shell_compliance();
  const ComplianceSet ring = ring_compliance(constants);
  const ReactionResult reactions = solve_reactions(shell, ring, constants.alpha);
  const Solution case4 = pipeline.case4(reactions);
  const auto profile_left = moment_profile(pipeline.mesh(), pipeline.dof_map(),
                                           constants.material(), case4, ProfileEdge::left);
  const auto profile_right = moment_profile(pipeline.mesh(), pipeline.dof_map(),
                                            constants.material(), case4, ProfileEdge::right);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path base(out_dir);

  std::ostringstream report;
  report << "R,M,Q,residuals\n"
         << format_number(reactions.horizontal_force) << ',' << format_number(reactions.moment)
         << ',' << format_number(reactions.shear_force) << ','
         << format_number(pipeline.max_residual()) << "\n";
  write_file_atomically(base / "report.csv", report.str());

  std::ostringstream left_text, right_text;
  write_profile_csv(profile_left, left_text);
  write_profile_csv(profile_right, right_text);
  write_file_atomically(base / "profile.csv", left_text.str());
  write_file_atomically(base / "profile_right.csv", right_text.str());

  std::cout << "R = " << format_number(reactions.horizontal_force) << " N/m\n"
            << "M = " << format_number(reactions.moment) << " N*m/m\n"
            << "Q = " << format_number(reactions.shear_force) << " N/m\n";
  return 0;
}

int run_convergence_command(const std::vector<std::string>& formulation_names,
                            const std::optional<double>& alpha, const std::vector<int>& n_values,
                            const std::string& mesh_arg, double magnitude, std::uint64_t seed,
                            const std::string& out_dir) {
  const GirkmannConstants constants;
  const MeshChoice choice = parse_mesh_choice(mesh_arg, magnitude, seed);
  if (!choice.import_path.empty()) {
    throw CLI::ValidationError("--mesh", "convergence tables need a generated mesh family");
  }

  std::vector<Formulation> formulations;
  if (formulation_names.empty()) {
    formulations = {Formulation::disp4(), Formulation::mitc4c(), Formulation::mitc4s(),
                    Formulation::mitc4c().stabilized(alpha.value_or(0.2)),
                    Formulation::mitc4s().stabilized(alpha.value_or(0.2))};
  } else {
    for (const auto& name : formulation_names) {
      formulations.push_back(parse_formulation(name, alpha));
    }
  }

  const auto rows = convergence_table(constants, formulations, n_values, choice.family);
  std::ostringstream table;
  write_convergence_csv(rows, table);
  std::filesystem::create_directories(out_dir);
  write_file_atomically(std::filesystem::path(out_dir) / "convergence.csv", table.str());
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-shell finite element benchmark for the stiffened spherical dome"};
  app.require_subcommand(1);

  std::string formulation_name = "mitc4c";
  std::vector<std::string> formulation_names;
  std::optional<double> stabilize;
  int n = 8;
  int benchmark_n = 32;
  std::vector<int> n_list;
  std::string mesh_arg = "regular";
  std::string import_path;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  auto* mesh_cmd = app.add_subcommand(
      "mesh", "Generate (or import) a quarter-dome mesh and write MSH 2.2 plus normals");
  mesh_cmd->add_option("--n", n, "Per-patch subdivisions (3 n^2 elements)")
      ->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--perturb,--magnitude", magnitude,
                       "Tangent-plane perturbation magnitude (fraction of local edge length)");
  mesh_cmd->add_option("--seed", seed, "Perturbation seed");
  mesh_cmd->add_option("--import", import_path, "Import an MSH 2.2 file instead of generating");
  mesh_cmd->add_option("--out", out_dir, "Output directory");

  auto* benchmark_cmd =
      app.add_subcommand("benchmark", "Full pipeline: compliances, ring, reactions, profiles");
  benchmark_cmd->add_option("--formulation", formulation_name, "disp4 | mitc4c | mitc4s");
  auto* stab_benchmark = benchmark_cmd->add_option(
      "--stabilize", stabilize, "Shear-balancing stabilization parameter (0.2 when omitted)");
  stab_benchmark->expected(0, 1);
  benchmark_cmd->add_option("--n", benchmark_n,
                            "Benchmark mesh index (elements per boundary edge, even)");
  benchmark_cmd->add_option("--mesh", mesh_arg, "regular | perturbed | <path to .msh>");
  benchmark_cmd->add_option("--magnitude", magnitude, "Perturbation magnitude");
  benchmark_cmd->add_option("--seed", seed, "Perturbation seed");
  benchmark_cmd->add_option("--out", out_dir, "Output directory");

  auto* convergence_cmd =
      app.add_subcommand("convergence", "Normalized compliance table over a mesh sequence");
  convergence_cmd->add_option("--formulation", formulation_names,
                              "Formulations (default: all, stabilized variants included)");
  auto* stab_convergence = convergence_cmd->add_option(
      "--stabilize", stabilize, "Stabilization parameter for the named formulations");
  stab_convergence->expected(0, 1);
  convergence_cmd->add_option("--n", n_list, "Ascending benchmark mesh indices")->required();
  convergence_cmd->add_option("--mesh", mesh_arg, "regular | perturbed");
  convergence_cmd->add_option("--magnitude", magnitude, "Perturbation magnitude");
  convergence_cmd->add_option("--seed", seed, "Perturbation seed");
  convergence_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (mesh_cmd->parsed()) {
      return run_mesh_command(n, magnitude, seed, import_path, out_dir);
    }
    if (benchmark_cmd->parsed()) {
      std::optional<double> alpha = stabilize;
      if (stab_benchmark->count() > 0 && !alpha) alpha = 0.2;
      return run_benchmark_command(parse_formulation(formulation_name, alpha), benchmark_n,
                                   mesh_arg, magnitude, seed, out_dir);
    }
    std::optional<double> alpha = stabilize;
    if (stab_convergence->count() > 0 && !alpha) alpha = 0.2;
    return run_convergence_command(formulation_names, alpha, n_list, mesh_arg, magnitude, seed,
                                   out_dir);
  } catch (const CLI::ParseError& error) {
    return app.exit(error) == 0 ? 0 : kExitInput;
  } catch (const ParseError& error) {
    std::cerr << "parse error: " << error.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& error) {
    std::cerr << "invalid input: " << error.what() << "\n";
    return kExitInput;
  } catch (const GeometryError& error) {
    std::cerr << "geometry error: " << error.what() << "\n";
    return kExitGeometry;
  } catch (const ConstraintError& error) {
    std::cerr << "constraint error: " << error.what() << "\n";
    return kExitGeometry;
  } catch (const SolverError& error) {
    std::cerr << "solver error: " << error.what() << "\n";
    return kExitSolver;
  } catch (const BenchmarkError& error) {
    std::cerr << "benchmark error: " << error.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitSolver;
  }
}
