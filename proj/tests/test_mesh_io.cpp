#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "harmap/error.hpp"
#include "harmap/mesh_io.hpp"
#include "harmap/shapes.hpp"
#include "harmap/voxel_grid.hpp"
#include "support.hpp"

using namespace harmap;

namespace {

// Torus from an n x m quad grid with wrap-around; Euler characteristic 0.
std::string torus_off(int n, int m) {
  std::ostringstream os;
  os << "OFF\n" << n * m << ' ' << 2 * n * m << " 0\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double u = 2 * M_PI * i / n, v = 2 * M_PI * j / m;
      os << (2 + std::cos(v)) * std::cos(u) << ' ' << (2 + std::cos(v)) * std::sin(u) << ' ' << std::sin(v) << '\n';
    }
  }
  auto id = [&](int i, int j) { return ((i + n) % n) * m + (j + m) % m; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      os << "3 " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << '\n';
      os << "3 " << id(i, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
    }
  }
  return os.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("harmap_test_" + name);
}

}  // namespace

TEST_CASE("octahedron OFF loads with Euler characteristic 2") {
  const SurfaceMesh m = testsupport::octahedron();
  CHECK(m.vertex_count() == 6);
  CHECK(m.triangle_count() == 8);
  CHECK(m.edge_count() == 12);
  CHECK(m.euler_characteristic() == 2);
  CHECK(m.bounding_box().min == Vec3(-1, -1, -1));
  CHECK(m.bounding_box().max == Vec3(1, 1, 1));
}

TEST_CASE("icosahedron OBJ loads closed with 12 vertices and 20 triangles") {
  const SurfaceMesh ico = icosphere(0);
  std::ostringstream obj;
  obj << "# icosahedron\no ico\n";
  for (const Vec3& v : ico.vertices()) obj << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  obj << "vn 0 0 1\n";
  for (const Triangle& t : ico.triangles()) obj << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  std::istringstream in(obj.str());
  MeshLoadStats stats;
  const SurfaceMesh m = read_obj(in, &stats);
  CHECK(m.vertex_count() == 12);
  CHECK(m.triangle_count() == 20);
  CHECK(m.euler_characteristic() == 2);
  CHECK(stats.ignored_records == 2);  // "o" and "vn"
}

TEST_CASE("OBJ face records with slashes use the vertex index") {
  std::istringstream in(
      "v 1 0 0\nv -1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nv 0 0 -1\n"
      "f 1/1/1 3/1/1 5/1/1\nf 3 2 5\nf 2 4 5\nf 4 1 5\nf 3 1 6\nf 2 3 6\nf 4 2 6\nf 1 4 6\n");
  CHECK(read_obj(in).triangle_count() == 8);
}

TEST_CASE("deleting one octahedron face reports exactly its three edges") {
  std::string text = testsupport::kOctahedronOff;
  text.replace(text.find("6 8 0"), 5, "6 7 0");
  text.erase(text.rfind("3 0 3 5\n"));
  std::istringstream in(text);
  try {
    read_off(in);
    FAIL("expected TopologyError");
  } catch (const TopologyError& e) {
    // Brute-force oracle: directed edges without a reversed partner.
    std::map<std::pair<int, int>, int> directed;
    const int faces[7][3] = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}};
    for (const auto& f : faces) {
      for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
    }
    std::size_t unmatched = 0;
    for (const auto& [e, n] : directed) unmatched += directed.count({e.second, e.first}) == 0;
    CHECK(unmatched == 3);
    CHECK(e.edges().size() == unmatched);
  }
}

TEST_CASE("torus is rejected and sphere accepted by the genus check") {
  std::istringstream torus(torus_off(8, 6));
  CHECK_THROWS_AS(read_off(torus), TopologyError);
  CHECK_NOTHROW(icosphere(2));
}

TEST_CASE("malformed and degenerate inputs") {
  std::istringstream no_header("6 8 0\n");
  CHECK_THROWS_AS(read_off(no_header), ParseError);
  std::istringstream quad("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  CHECK_THROWS_AS(read_off(quad), ParseError);
  std::istringstream out_of_range("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
  CHECK_THROWS_AS(read_off(out_of_range), TopologyError);
  // Two copies of one triangle with opposite orientation: closed, but zero area.
  std::istringstream flat("OFF\n3 2 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n3 0 2 1\n");
  CHECK_THROWS_AS(read_off(flat), TopologyError);
  CHECK_THROWS_AS(load_mesh(temp_path("missing.off"), MeshFormat::Off), IoError);
  CHECK(format_from_path("a/b.OBJ") == MeshFormat::Obj);
  CHECK_THROWS_AS(format_from_path("mesh.stl"), ParseError);
}

TEST_CASE("write then load reproduces coordinates and connectivity") {
  ShapeParams p;
  p.subdivision = 2;
  const SurfaceMesh m = generate_shape(ShapeKind::Star5, p);
  const auto path = temp_path("roundtrip.off");
  write_mesh(m, path);
  const SurfaceMesh back = load_mesh(path, MeshFormat::Off);
  std::filesystem::remove(path);
  CHECK(back.triangles() == m.triangles());
  REQUIRE(back.vertex_count() == m.vertex_count());
  for (std::size_t i = 0; i < m.vertex_count(); ++i) CHECK(back.vertices()[i] == m.vertices()[i]);
}

TEST_CASE("field file of a constant 3x3x3 grid") {
  VoxelGrid g({3, 3, 3}, Vec3(0, 0, 0), 1.0);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.set_flag(i, NodeFlag::Boundary);
    g.set_phi(i, 1.0);
  }
  g.set_flag(13, NodeFlag::Interior);
  std::ostringstream out;
  write_field(g, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "3 3 3");
  std::getline(lines, line);
  int values = 0;
  while (std::getline(lines, line)) {
    CHECK((line == "B 1" || line == "I 1"));
    ++values;
  }
  CHECK(values == 27);
}

TEST_CASE("field round trip is bit exact") {
  auto solved = testsupport::solved_shape(ShapeKind::TwoLobe, 1, 16, 1e-4);
  std::ostringstream out;
  write_field(solved.grid, out);
  std::istringstream in(out.str());
  const VoxelGrid back = read_field(in);
  CHECK(back.dims() == solved.grid.dims());
  CHECK(back.origin() == solved.grid.origin());
  CHECK(back.spacing() == solved.grid.spacing());
  CHECK(std::equal(back.flags().begin(), back.flags().end(), solved.grid.flags().begin()));
  CHECK(std::equal(back.phi().begin(), back.phi().end(), solved.grid.phi().begin()));
  CHECK(back.center() == solved.grid.center());
  CHECK(back.guard_layers() == 4);
}

TEST_CASE("empty grid cannot be written") {
  std::ostringstream out;
  CHECK_THROWS_AS(write_field(VoxelGrid{}, out), IoError);
}
