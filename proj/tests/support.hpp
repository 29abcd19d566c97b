#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "harmap/laplace_solver.hpp"
#include "harmap/mesh_io.hpp"
#include "harmap/shapes.hpp"
#include "harmap/voxel_grid.hpp"

namespace testsupport {

inline const char* kOctahedronOff =
    "OFF\n6 8 0\n"
    "1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n"
    "3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n"
    "3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

inline harmap::SurfaceMesh octahedron() {
  std::istringstream in(kOctahedronOff);
  return harmap::read_off(in);
}

/// Solves A x = b by Gaussian elimination with partial pivoting. A is n*n,
/// row-major.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

/// n^3 lattice of unit spacing whose outer shell is Boundary (phi = 1) and
/// whose inside is Interior.
inline harmap::VoxelGrid shell_sealed_cube(int n, double interior_value = 0.5) {
  harmap::VoxelGrid g({n, n, n}, harmap::Vec3(0, 0, 0), 1.0);
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const auto c = g.coords(idx);
    const bool shell = c.i == 0 || c.j == 0 || c.k == 0 || c.i == n - 1 || c.j == n - 1 || c.k == n - 1;
    g.set_flag(idx, shell ? harmap::NodeFlag::Boundary : harmap::NodeFlag::Interior);
    g.set_phi(idx, shell ? 1.0 : interior_value);
  }
  return g;
}

/// Direct solve of the 7-point system on the Interior nodes of `grid`,
/// treating every other node as fixed. Returns phi per node.
inline std::vector<double> direct_solution(const harmap::VoxelGrid& grid) {
  std::vector<long> unknown(grid.node_count(), -1);
  std::vector<std::size_t> nodes;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    if (grid.flag(idx) == harmap::NodeFlag::Interior) {
      unknown[idx] = static_cast<long>(nodes.size());
      nodes.push_back(idx);
    }
  }
  const std::size_t n = nodes.size();
  std::vector<double> a(n * n, 0.0), b(n, 0.0);
  const auto offsets = grid.neighbor_offsets();
  for (std::size_t row = 0; row < n; ++row) {
    a[row * n + row] = 6.0;
    for (auto off : offsets) {
      const std::size_t nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(nodes[row]) + off);
      if (unknown[nb] >= 0) {
        a[row * n + static_cast<std::size_t>(unknown[nb])] -= 1.0;
      } else {
        b[row] += grid.phi(nb);
      }
    }
  }
  const std::vector<double> x = dense_solve(std::move(a), std::move(b));
  std::vector<double> phi(grid.phi().begin(), grid.phi().end());
  for (std::size_t row = 0; row < n; ++row) phi[nodes[row]] = x[row];
  return phi;
}

/// Shape mesh discretized, centered and solved.
struct SolvedShape {
  harmap::SurfaceMesh mesh;
  harmap::VoxelGrid grid;
  std::size_t center = 0;
};

inline SolvedShape solved_shape(harmap::ShapeKind kind, int subdivision, int resolution, double zeta) {
  harmap::ShapeParams params;
  params.subdivision = subdivision;
  harmap::SurfaceMesh mesh = harmap::generate_shape(kind, params);
  harmap::GridConfig gc;
  gc.resolution = resolution;
  harmap::VoxelGrid grid = harmap::discretize(mesh, gc);
  const std::size_t c = harmap::choose_center(grid);
  harmap::apply_boundary_conditions(grid, gc);
  harmap::SolverConfig sc;
  sc.zeta = zeta;
  harmap::solve(grid, sc);
  return {std::move(mesh), std::move(grid), c};
}

}  // namespace testsupport
