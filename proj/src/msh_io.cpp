#include "shellbench/msh_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "shellbench/errors.hpp"

namespace shellbench {

namespace {

std::array<int, 2> sorted_edge(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

// Line-oriented reader keeping a 1-based line counter for diagnostics.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Re-orient imported elements consistently by flood fill, then prefer the
// outward (away from centroid) orientation when that is meaningful.
void orient_consistently(SurfaceMesh& mesh) {
  if (mesh.elements.empty()) return;
  std::map<std::array<int, 2>, std::vector<int>> adjacency;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& en = mesh.elements[e].nodes;
    for (int k = 0; k < 4; ++k) adjacency[sorted_edge(en[k], en[(k + 1) % 4])].push_back(e);
  }
  auto traverses_forward = [&](int e, const std::array<int, 2>& edge) {
    const auto& en = mesh.elements[e].nodes;
    for (int k = 0; k < 4; ++k) {
      if (en[k] == edge[0] && en[(k + 1) % 4] == edge[1]) return true;
    }
    return false;
  };

  std::vector<int> state(mesh.elements.size(), 0);  // 0 unseen, 1 queued/done
  for (int root = 0; root < mesh.element_count(); ++root) {
    if (state[root] != 0) continue;
    state[root] = 1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int e = queue.front();
      queue.pop_front();
      const auto en = mesh.elements[e].nodes;
      for (int k = 0; k < 4; ++k) {
        const auto key = sorted_edge(en[k], en[(k + 1) % 4]);
        for (int other : adjacency.at(key)) {
          if (other == e || state[other] != 0) continue;
          const std::array<int, 2> directed{en[k], en[(k + 1) % 4]};
          // neighbour must traverse the shared edge in the opposite direction
          if (traverses_forward(other, directed)) {
            std::swap(mesh.elements[other].nodes[1], mesh.elements[other].nodes[3]);
          }
          state[other] = 1;
          queue.push_back(other);
        }
      }
    }
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& node : mesh.nodes) centroid += node.position;
  centroid /= std::max<std::size_t>(mesh.nodes.size(), 1);
  double outwardness = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto p = mesh.corner_positions(e);
    const Eigen::Vector3d n = (p[2] - p[0]).cross(p[3] - p[1]);
    Eigen::Vector3d mid = 0.25 * (p[0] + p[1] + p[2] + p[3]);
    outwardness += n.dot(mid - centroid);
  }
  if (outwardness < 0.0) {
    for (auto& element : mesh.elements) std::swap(element.nodes[1], element.nodes[3]);
  }
}

}  // namespace

SurfaceMesh parse_msh(std::istream& in) {
  LineReader reader(in);
  std::string line;

  bool format_seen = false;
  std::map<int, std::string> physical_names;  // id -> name (any dimension)
  std::vector<Node> nodes;
  std::map<std::int64_t, int> node_index;
  SurfaceMesh mesh;

  auto resolve_node = [&](std::int64_t file_id, std::size_t at_line, std::int64_t element_id) {
    auto it = node_index.find(file_id);
    if (it == node_index.end()) {
      throw ParseError(at_line, "element " + std::to_string(element_id) +
                                    " references unknown node " + std::to_string(file_id));
    }
    return it->second;
  };

  while (reader.next(line)) {
    if (line[0] != '$') {
      throw ParseError(reader.line_number(), "expected a section header, got '" + line + "'");
    }
    const std::string section = line.substr(1);
    if (section == "MeshFormat") {
      if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $MeshFormat");
      std::istringstream fields(line);
      std::string version;
      int file_type = -1, data_size = 0;
      fields >> version >> file_type >> data_size;
      if (version != "2.2") {
        throw ParseError(reader.line_number(), "unsupported MSH version '" + version + "' (need 2.2)");
      }
      if (file_type != 0) {
        throw ParseError(reader.line_number(), "binary MSH files are not supported");
      }
      if (!reader.next(line) || line != "$EndMeshFormat") {
        throw ParseError(reader.line_number(), "missing $EndMeshFormat");
      }
      format_seen = true;
    } else if (section == "PhysicalNames") {
      if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $PhysicalNames");
      const long count = std::strtol(line.c_str(), nullptr, 10);
      for (long i = 0; i < count; ++i) {
        if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $PhysicalNames");
        std::istringstream fields(line);
        int dim = 0, id = 0;
        fields >> dim >> id;
        std::string rest;
        std::getline(fields, rest);
        const auto first_quote = rest.find('"');
        const auto last_quote = rest.rfind('"');
        if (first_quote == std::string::npos || last_quote <= first_quote) {
          throw ParseError(reader.line_number(), "malformed physical name");
        }
        physical_names[id] = rest.substr(first_quote + 1, last_quote - first_quote - 1);
      }
      if (!reader.next(line) || line != "$EndPhysicalNames") {
        throw ParseError(reader.line_number(), "missing $EndPhysicalNames");
      }
    } else if (section == "Nodes") {
      if (!format_seen) throw ParseError(reader.line_number(), "$Nodes before $MeshFormat");
      if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $Nodes");
      const long count = std::strtol(line.c_str(), nullptr, 10);
      for (long i = 0; i < count; ++i) {
        if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $Nodes");
        std::istringstream fields(line);
        std::int64_t file_id = 0;
        double x = 0, y = 0, z = 0;
        if (!(fields >> file_id >> x >> y >> z)) {
          throw ParseError(reader.line_number(), "malformed node line");
        }
        const int index = static_cast<int>(nodes.size());
        if (!node_index.emplace(file_id, index).second) {
          throw ParseError(reader.line_number(), "duplicate node id " + std::to_string(file_id));
        }
        nodes.push_back(Node{index, Eigen::Vector3d(x, y, z), Eigen::Vector3d::UnitZ()});
      }
      if (!reader.next(line) || line != "$EndNodes") {
        throw ParseError(reader.line_number(), "missing $EndNodes");
      }
    } else if (section == "Elements") {
      if (nodes.empty()) throw ParseError(reader.line_number(), "$Elements before $Nodes");
      if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $Elements");
      const long count = std::strtol(line.c_str(), nullptr, 10);
      for (long i = 0; i < count; ++i) {
        if (!reader.next(line)) throw ParseError(reader.line_number(), "truncated $Elements");
        std::istringstream fields(line);
        std::int64_t element_id = 0;
        int type = 0, n_tags = 0;
        if (!(fields >> element_id >> type >> n_tags)) {
          throw ParseError(reader.line_number(), "malformed element line");
        }
        int physical = 0;
        for (int t = 0; t < n_tags; ++t) {
          int tag = 0;
          fields >> tag;
          if (t == 0) physical = tag;
        }
        auto tag_name = [&]() {
          auto it = physical_names.find(physical);
          return it != physical_names.end() ? it->second : "phys" + std::to_string(physical);
        };
        if (type == 3) {
          std::array<int, 4> quad{};
          for (int k = 0; k < 4; ++k) {
            std::int64_t file_id = 0;
            if (!(fields >> file_id)) throw ParseError(reader.line_number(), "truncated quad");
            quad[k] = resolve_node(file_id, reader.line_number(), element_id);
          }
          mesh.elements.push_back(QuadElement{quad});
        } else if (type == 1) {
          std::int64_t a = 0, b = 0;
          if (!(fields >> a >> b)) throw ParseError(reader.line_number(), "truncated line element");
          const int na = resolve_node(a, reader.line_number(), element_id);
          const int nb = resolve_node(b, reader.line_number(), element_id);
          mesh.edge_tags[tag_name()].push_back(sorted_edge(na, nb));
        } else if (type == 15) {
          std::int64_t a = 0;
          if (!(fields >> a)) throw ParseError(reader.line_number(), "truncated point element");
          mesh.node_tags[tag_name()].push_back(resolve_node(a, reader.line_number(), element_id));
        } else {
          throw ParseError(reader.line_number(),
                           "unsupported element type " + std::to_string(type) + " in element " +
                               std::to_string(element_id) + " (only lines, points and quads)");
        }
      }
      if (!reader.next(line) || line != "$EndElements") {
        throw ParseError(reader.line_number(), "missing $EndElements");
      }
    } else {
      // skip unknown sections
      const std::string terminator = "$End" + section;
      bool closed = false;
      while (reader.next(line)) {
        if (line == terminator) {
          closed = true;
          break;
        }
      }
      if (!closed) throw ParseError(reader.line_number(), "unterminated section $" + section);
    }
  }

  if (!format_seen) throw ParseError(reader.line_number(), "missing $MeshFormat section");
  if (nodes.empty()) throw ParseError(reader.line_number(), "missing $Nodes section");
  if (mesh.elements.empty()) throw ParseError(reader.line_number(), "no quadrangle elements found");

  mesh.nodes = std::move(nodes);
  mesh.provenance = Provenance::imported;
  for (auto& [name, edges] : mesh.edge_tags) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    auto& tagged = mesh.node_tags[name];
    for (const auto& e : edges) {
      tagged.push_back(e[0]);
      tagged.push_back(e[1]);
    }
  }
  for (auto& [name, ids] : mesh.node_tags) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  orient_consistently(mesh);
  mesh = compute_nodal_normals(std::move(mesh), NormalMode::averaged);
  validate_mesh(mesh, /*require_full_boundary_tags=*/false);
  return mesh;
}

SurfaceMesh parse_msh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mesh file: " + path);
  return parse_msh(in);
}

void write_msh(const SurfaceMesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  std::map<std::string, int> tag_ids;
  int next_id = 1;
  for (const auto& [name, edges] : mesh.edge_tags) tag_ids[name] = next_id++;
  const int surface_id = next_id;

  out << "$PhysicalNames\n" << (tag_ids.size() + 1) << "\n";
  for (const auto& [name, id] : tag_ids) out << "1 " << id << " \"" << name << "\"\n";
  out << "2 " << surface_id << " \"shell\"\n$EndPhysicalNames\n";

  out << "$Nodes\n" << mesh.node_count() << "\n";
  for (const auto& node : mesh.nodes) {
    out << (node.id + 1) << ' ' << format_double(node.position.x()) << ' '
        << format_double(node.position.y()) << ' ' << format_double(node.position.z()) << "\n";
  }
  out << "$EndNodes\n";

  std::size_t n_lines = 0;
  for (const auto& [name, edges] : mesh.edge_tags) n_lines += edges.size();
  out << "$Elements\n" << (n_lines + mesh.elements.size()) << "\n";
  int element_id = 1;
  for (const auto& [name, edges] : mesh.edge_tags) {
    const int id = tag_ids.at(name);
    for (const auto& e : edges) {
      out << element_id++ << " 1 2 " << id << ' ' << id << ' ' << (e[0] + 1) << ' '
          << (e[1] + 1) << "\n";
    }
  }
  for (const auto& element : mesh.elements) {
    out << element_id++ << " 3 2 " << surface_id << ' ' << surface_id;
    for (int k = 0; k < 4; ++k) out << ' ' << (element.nodes[k] + 1);
    out << "\n";
  }
  out << "$EndElements\n";
}

void write_msh_file(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  write_msh(mesh, out);
}

void write_normals_sidecar(const SurfaceMesh& mesh, std::ostream& out) {
  for (const auto& node : mesh.nodes) {
    out << (node.id + 1) << ' ' << format_double(node.normal.x()) << ' '
        << format_double(node.normal.y()) << ' ' << format_double(node.normal.z()) << "\n";
  }
}

void write_normals_sidecar_file(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  write_normals_sidecar(mesh, out);
}

SurfaceMesh apply_normals_sidecar(SurfaceMesh mesh, std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::size_t applied = 0;
  while (reader.next(line)) {
    std::istringstream fields(line);
    std::int64_t file_id = 0;
    double nx = 0, ny = 0, nz = 0;
    if (!(fields >> file_id >> nx >> ny >> nz)) {
      throw ParseError(reader.line_number(), "malformed normals line");
    }
    const std::int64_t index = file_id - 1;
    if (index < 0 || index >= mesh.node_count()) {
      throw ParseError(reader.line_number(), "normal for unknown node " + std::to_string(file_id));
    }
    Eigen::Vector3d n(nx, ny, nz);
    if (std::abs(n.norm() - 1.0) > 1e-9) {
      throw ParseError(reader.line_number(), "normal is not a unit vector");
    }
    mesh.nodes[static_cast<int>(index)].normal = n.normalized();
    ++applied;
  }
  if (applied != mesh.nodes.size()) {
    throw ParseError(reader.line_number(), "normals sidecar does not cover every node");
  }
  return mesh;
}

}  // namespace shellbench
