#pragma once

#include <iosfwd>
#include <string>

#include "shellbench/mesh.hpp"

namespace shellbench {

// MSH version 2.2 ASCII. Supported element types: 1 (2-node line, mapped to
// an edge tag through its physical-group name), 3 (4-node quadrangle) and
// 15 (point, mapped to a node tag). Anything else raises ParseError with the
// offending element id and line number. Nodal normals of the parsed mesh are
// averaged from the facet normals; provenance is `imported`.
SurfaceMesh parse_msh(std::istream& in);
SurfaceMesh parse_msh_file(const std::string& path);

// Deterministic writer: fixed section order, 17 significant digits, so equal
// meshes serialize to identical bytes.
void write_msh(const SurfaceMesh& mesh, std::ostream& out);
void write_msh_file(const SurfaceMesh& mesh, const std::string& path);

// Normals sidecar, one "id nx ny nz" line per node.
void write_normals_sidecar(const SurfaceMesh& mesh, std::ostream& out);
void write_normals_sidecar_file(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh apply_normals_sidecar(SurfaceMesh mesh, std::istream& in);

}  // namespace shellbench
