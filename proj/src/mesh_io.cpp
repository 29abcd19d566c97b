#include "harmap/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>

#include "harmap/error.hpp"
#include "harmap/voxel_grid.hpp"

namespace harmap {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::string describe_edges(const std::vector<Edge>& edges) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(edges.size(), 8);
  for (std::size_t e = 0; e < shown; ++e) {
    os << (e ? ", " : "") << edges[e].first << '-' << edges[e].second;
  }
  if (shown < edges.size()) os << ", ...";
  return os.str();
}

void validate_topology(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles) {
  if (vertices.empty() || triangles.empty()) {
    throw TopologyError("mesh has no vertices or no triangles");
  }
  const int nv = static_cast<int>(vertices.size());
  std::vector<char> referenced(vertices.size(), 0);

  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) {
        throw TopologyError("triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(v) + " out of range [0, " + std::to_string(nv) + ")");
      }
      referenced[static_cast<std::size_t>(v)] = 1;
    }
    const Vec3& a = vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = vertices[static_cast<std::size_t>(tri[2])];
    const double area2 = norm(cross(b - a, c - a));
    const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] || !(area2 > 1e-14 * scale * scale)) {
      throw TopologyError("triangle " + std::to_string(t) + " is degenerate (zero area)");
    }
  }
  for (std::size_t v = 0; v < referenced.size(); ++v) {
    if (!referenced[v]) throw TopologyError("vertex " + std::to_string(v) + " is not used by any triangle");
  }

  // Each directed edge must occur once and be matched by its reverse.
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(triangles.size() * 3);
  std::vector<Edge> repeated;
  for (const Triangle& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[static_cast<std::size_t>(e)];
      const int b = tri[static_cast<std::size_t>((e + 1) % 3)];
      if (++directed[edge_key(a, b)] == 2) repeated.emplace_back(a, b);
    }
  }
  if (!repeated.empty()) {
    throw TopologyError("non-manifold or inconsistently oriented edges: " + describe_edges(repeated),
                        repeated);
  }
  std::vector<Edge> open;
  for (const Triangle& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[static_cast<std::size_t>(e)];
      const int b = tri[static_cast<std::size_t>((e + 1) % 3)];
      if (!directed.contains(edge_key(b, a))) open.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  if (!open.empty()) {
    std::sort(open.begin(), open.end());
    throw TopologyError(std::to_string(open.size()) + " boundary edges: " + describe_edges(open), open);
  }

  const long chi = static_cast<long>(vertices.size()) - static_cast<long>(triangles.size() * 3 / 2) +
                   static_cast<long>(triangles.size());
  if (chi != 2) {
    throw TopologyError("Euler characteristic is " + std::to_string(chi) +
                        ", expected 2 for a single genus-0 surface");
  }
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Splits a stream into whitespace tokens, dropping '#' comments.
std::vector<std::string> off_tokens(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

template <typename T>
T parse_number(const std::string& tok, const char* what) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(std::string("expected ") + what + ", got '" + tok + "'");
  }
  return value;
}

void format_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

}  // namespace

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  validate_topology(vertices_, triangles_);
  bbox_.min = bbox_.max = vertices_.front();
  for (const Vec3& v : vertices_) {
    for (int a = 0; a < 3; ++a) {
      bbox_.min[a] = std::min(bbox_.min[a], v[a]);
      bbox_.max[a] = std::max(bbox_.max[a], v[a]);
    }
  }
}

MeshFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lowercase(path.extension().string());
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  throw ParseError("cannot infer mesh format from '" + path.string() + "' (expected .off or .obj)");
}

SurfaceMesh read_off(std::istream& in) {
  const std::vector<std::string> tok = off_tokens(in);
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tok.size()) throw ParseError("unexpected end of OFF data");
    return tok[pos++];
  };
  if (next() != "OFF") throw ParseError("missing OFF header");
  const long nv = parse_number<long>(next(), "vertex count");
  const long nf = parse_number<long>(next(), "face count");
  parse_number<long>(next(), "edge count");
  if (nv < 0 || nf < 0) throw ParseError("negative element count in OFF header");

  std::vector<Vec3> vertices(static_cast<std::size_t>(nv));
  for (Vec3& v : vertices) {
    v.x = parse_number<double>(next(), "coordinate");
    v.y = parse_number<double>(next(), "coordinate");
    v.z = parse_number<double>(next(), "coordinate");
  }
  std::vector<Triangle> triangles(static_cast<std::size_t>(nf));
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const long n = parse_number<long>(next(), "face vertex count");
    if (n != 3) throw ParseError("face " + std::to_string(f) + " has " + std::to_string(n) + " vertices; only triangles are supported");
    for (int& idx : triangles[f]) idx = parse_number<int>(next(), "vertex index");
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh read_obj(std::istream& in, MeshLoadStats* stats) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::size_t ignored = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    try {
      if (kind == "v") {
        if (fields.size() < 3) throw ParseError("vertex record needs 3 coordinates");
        vertices.emplace_back(parse_number<double>(fields[0], "coordinate"),
                              parse_number<double>(fields[1], "coordinate"),
                              parse_number<double>(fields[2], "coordinate"));
      } else if (kind == "f") {
        if (fields.size() != 3) throw ParseError("only triangular faces are supported");
        Triangle tri{};
        for (std::size_t c = 0; c < 3; ++c) {
          const std::string head = fields[c].substr(0, fields[c].find('/'));
          const long raw = parse_number<long>(head, "vertex index");
          const long idx = raw < 0 ? static_cast<long>(vertices.size()) + raw : raw - 1;
          if (raw == 0) throw ParseError("OBJ indices are 1-based; got 0");
          tri[c] = static_cast<int>(idx);
        }
        triangles.push_back(tri);
      } else {
        ++ignored;
      }
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (stats) stats->ignored_records = ignored;
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh load_mesh(const std::filesystem::path& path, MeshFormat format, MeshLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path.string() + "'");
  return format == MeshFormat::Off ? read_off(in) : read_obj(in, stats);
}

void write_off(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles,
               std::ostream& out) {
  out << "OFF\n" << vertices.size() << ' ' << triangles.size() << " 0\n";
  for (const Vec3& v : vertices) {
    format_double(out, v.x);
    out << ' ';
    format_double(out, v.y);
    out << ' ';
    format_double(out, v.z);
    out << '\n';
  }
  for (const Triangle& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off(const SurfaceMesh& mesh, std::ostream& out) {
  write_off(mesh.vertices(), mesh.triangles(), out);
}

void write_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path.string() + "'");
  write_off(mesh, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_field(const VoxelGrid& grid, std::ostream& out) {
  if (grid.empty()) throw IoError("EmptyGrid: refusing to write a grid with no nodes");
  out << grid.nx() << ' ' << grid.ny() << ' ' << grid.nz() << '\n';
  format_double(out, grid.origin().x);
  out << ' ';
  format_double(out, grid.origin().y);
  out << ' ';
  format_double(out, grid.origin().z);
  out << ' ';
  format_double(out, grid.spacing());
  out << '\n';
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    out << flag_letter(grid.flag(n)) << ' ';
    format_double(out, grid.phi(n));
    out << '\n';
  }
}

void write_field(const VoxelGrid& grid, const std::filesystem::path& path) {
  if (grid.empty()) throw IoError("EmptyGrid: refusing to write a grid with no nodes");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write field file '" + path.string() + "'");
  write_field(grid, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

VoxelGrid read_field(std::istream& in) {
  std::array<int, 3> dims{};
  std::string tok;
  auto next = [&](const char* what) {
    if (!(in >> tok)) throw ParseError(std::string("field file truncated reading ") + what);
    return tok;
  };
  for (int& d : dims) {
    d = parse_number<int>(next("dimensions"), "grid dimension");
    if (d <= 0) throw ParseError("grid dimensions must be positive");
  }
  Vec3 origin;
  origin.x = parse_number<double>(next("origin"), "origin");
  origin.y = parse_number<double>(next("origin"), "origin");
  origin.z = parse_number<double>(next("origin"), "origin");
  const double h = parse_number<double>(next("spacing"), "spacing");
  if (!(h > 0.0)) throw ParseError("grid spacing must be positive");

  VoxelGrid grid(dims, origin, h);
  std::optional<std::size_t> center;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const std::string f = next("node record");
    NodeFlag flag;
    if (f == "E") flag = NodeFlag::Exterior;
    else if (f == "B") flag = NodeFlag::Boundary;
    else if (f == "I") flag = NodeFlag::Interior;
    else if (f == "C") flag = NodeFlag::Center;
    else throw ParseError("node " + std::to_string(n) + ": unknown flag '" + f + "'");
    grid.set_flag(n, flag);
    grid.set_phi(n, parse_number<double>(next("node record"), "potential"));
    if (flag == NodeFlag::Center) {
      if (center) throw ParseError("field file has more than one center node");
      center = n;
    }
  }
  grid.refresh_exterior_layers();
  if (center) grid.set_center(*center);

  // Guard depth is the last exterior layer whose potential still rises.
  std::vector<double> layer_phi;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const int layer = grid.exterior_layer(n);
    if (grid.flag(n) != NodeFlag::Exterior || layer >= VoxelGrid::kUnreachedLayer) continue;
    if (layer_phi.size() <= static_cast<std::size_t>(layer)) {
      layer_phi.resize(static_cast<std::size_t>(layer) + 1, std::numeric_limits<double>::quiet_NaN());
    }
    if (std::isnan(layer_phi[static_cast<std::size_t>(layer)])) layer_phi[static_cast<std::size_t>(layer)] = grid.phi(n);
  }
  int guard = 0;
  double previous = 1.0;
  for (std::size_t layer = 1; layer < layer_phi.size(); ++layer) {
    if (std::isnan(layer_phi[layer]) || !(layer_phi[layer] > previous)) break;
    previous = layer_phi[layer];
    guard = static_cast<int>(layer);
  }
  grid.set_guard_layers(guard);
  return grid;
}

VoxelGrid read_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file '" + path.string() + "'");
  return read_field(in);
}

}  // namespace harmap
