#include "harmap/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "harmap/error.hpp"
#include "harmap/mesh_io.hpp"

namespace harmap {

char flag_letter(NodeFlag flag) {
  switch (flag) {
    case NodeFlag::Exterior: return 'E';
    case NodeFlag::Boundary: return 'B';
    case NodeFlag::Interior: return 'I';
    case NodeFlag::Center: return 'C';
  }
  return '?';
}

void GridConfig::validate() const {
  if (resolution <= 0) throw InvalidParams("resolution must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0e-3)) throw InvalidParams("epsilon must lie in (0, 1e-3]");
  if (guard_layers < 1) throw InvalidParams("guard_layers must be at least 1");
  if (padding < 5 || padding < guard_layers + 1) {
    throw InvalidParams("padding must be at least 5 and exceed guard_layers");
  }
}

VoxelGrid::VoxelGrid(std::array<int, 3> dims, Vec3 origin, double spacing)
    : dims_(dims), origin_(origin), spacing_(spacing) {
  const std::size_t n = static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
                        static_cast<std::size_t>(dims[2]);
  flags_.assign(n, NodeFlag::Exterior);
  phi_.assign(n, 0.0);
  layers_.assign(n, kUnreachedLayer);
}

GridIndex VoxelGrid::coords(std::size_t idx) const {
  const std::size_t nx = static_cast<std::size_t>(dims_[0]);
  const std::size_t ny = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
}

std::array<std::ptrdiff_t, 6> VoxelGrid::neighbor_offsets() const {
  const std::ptrdiff_t sx = 1;
  const std::ptrdiff_t sy = dims_[0];
  const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(dims_[0]) * dims_[1];
  return {-sx, sx, -sy, sy, -sz, sz};
}

void VoxelGrid::set_center(std::size_t idx) {
  if (center_ && *center_ != idx && flags_[*center_] == NodeFlag::Center) {
    flags_[*center_] = NodeFlag::Interior;
  }
  flags_[idx] = NodeFlag::Center;
  center_ = idx;
}

std::size_t VoxelGrid::count(NodeFlag f) const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), f));
}

namespace {

// Calls fn(neighbor) for every in-grid 6-neighbour of idx.
template <typename Fn>
void for_each_neighbor(const VoxelGrid& grid, std::size_t idx, Fn&& fn) {
  const GridIndex g = grid.coords(idx);
  static constexpr int d[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (const auto& o : d) {
    const int i = g.i + o[0], j = g.j + o[1], k = g.k + o[2];
    if (grid.contains(i, j, k)) fn(grid.index(i, j, k));
  }
}

}  // namespace

void VoxelGrid::refresh_exterior_layers() {
  std::fill(layers_.begin(), layers_.end(), kUnreachedLayer);
  std::deque<std::size_t> queue;
  for (std::size_t n = 0; n < flags_.size(); ++n) {
    if (flags_[n] != NodeFlag::Exterior) {
      layers_[n] = 0;
      if (flags_[n] == NodeFlag::Boundary) queue.push_back(n);
    }
  }
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    for_each_neighbor(*this, n, [&](std::size_t m) {
      if (flags_[m] == NodeFlag::Exterior && layers_[m] == kUnreachedLayer) {
        layers_[m] = layers_[n] + 1;
        queue.push_back(m);
      }
    });
  }
}

VoxelGrid make_lattice(const BoundingBox& box, const GridConfig& cfg) {
  cfg.validate();
  const Vec3 extent = box.extent();
  const double longest = std::max({extent.x, extent.y, extent.z});
  if (!(longest > 0.0)) throw InvalidParams("bounding box is empty");
  if (cfg.resolution < 8) {
    throw ResolutionTooCoarse("resolution " + std::to_string(cfg.resolution) + " is below the minimum of 8");
  }
  const double h = longest / (cfg.resolution - 1);
  const int half = static_cast<int>(std::ceil(0.5 * (cfg.resolution - 1) - 1e-9)) + cfg.padding;
  const int n = 2 * half + 1;
  const Vec3 origin = box.center() - Vec3(half * h, half * h, half * h);
  return VoxelGrid({n, n, n}, origin, h);
}

namespace {

struct Point2 {
  double y;
  double z;
};

bool lex_less(const Point2& a, const Point2& b) { return a.y < b.y || (a.y == b.y && a.z < b.z); }

double orient(const Point2& a, const Point2& b, const Point2& p) {
  return (b.y - a.y) * (p.z - a.z) - (b.z - a.z) * (p.y - a.y);
}

// Sign of orient(a, b, p + (d, d^2)) for infinitesimal d > 0. Edges are
// evaluated in a canonical direction so both triangles sharing an edge see
// exactly negated values.
int perturbed_side(const Point2& a, const Point2& b, const Point2& p) {
  const bool swap = lex_less(b, a);
  const Point2& u = swap ? b : a;
  const Point2& v = swap ? a : b;
  double o = orient(u, v, p);
  if (o == 0.0) o = (v.z != u.z) ? -(v.z - u.z) : (v.y - u.y);
  const int s = (o > 0.0) - (o < 0.0);
  return swap ? -s : s;
}

}  // namespace

std::vector<bool> inside_mask(const SurfaceMesh& mesh, const VoxelGrid& lattice) {
  const int nx = lattice.nx(), ny = lattice.ny(), nz = lattice.nz();
  const double h = lattice.spacing();
  const Vec3& o = lattice.origin();
  std::vector<std::vector<double>> crossings(static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz));

  for (const Triangle& tri : mesh.triangles()) {
    const Vec3& A = mesh.vertices()[static_cast<std::size_t>(tri[0])];
    const Vec3& B = mesh.vertices()[static_cast<std::size_t>(tri[1])];
    const Vec3& C = mesh.vertices()[static_cast<std::size_t>(tri[2])];
    const Point2 a{A.y, A.z}, b{B.y, B.z}, c{C.y, C.z};
    const double area = orient(a, b, c);
    if (area == 0.0) continue;  // edge-on in projection
    const int sign = area > 0.0 ? 1 : -1;

    const double ymin = std::min({a.y, b.y, c.y}), ymax = std::max({a.y, b.y, c.y});
    const double zmin = std::min({a.z, b.z, c.z}), zmax = std::max({a.z, b.z, c.z});
    const int j0 = std::max(0, static_cast<int>(std::ceil((ymin - o.y) / h)) - 1);
    const int j1 = std::min(ny - 1, static_cast<int>(std::floor((ymax - o.y) / h)) + 1);
    const int k0 = std::max(0, static_cast<int>(std::ceil((zmin - o.z) / h)) - 1);
    const int k1 = std::min(nz - 1, static_cast<int>(std::floor((zmax - o.z) / h)) + 1);
    for (int k = k0; k <= k1; ++k) {
      for (int j = j0; j <= j1; ++j) {
        const Point2 p{o.y + j * h, o.z + k * h};
        if (perturbed_side(a, b, p) != sign || perturbed_side(b, c, p) != sign ||
            perturbed_side(c, a, p) != sign) {
          continue;
        }
        const double wa = orient(b, c, p) / area;
        const double wb = orient(c, a, p) / area;
        const double wc = 1.0 - wa - wb;
        crossings[static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k)]
            .push_back(wa * A.x + wb * B.x + wc * C.x);
      }
    }
  }

  std::vector<bool> inside(lattice.node_count(), false);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      auto& xs = crossings[static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k)];
      if (xs.empty()) continue;
      std::sort(xs.begin(), xs.end());
      std::size_t passed = 0;
      for (int i = 0; i < nx; ++i) {
        const double x = o.x + i * h;
        while (passed < xs.size() && xs[passed] < x) ++passed;
        inside[lattice.index(i, j, k)] = (passed % 2) == 1;
      }
    }
  }
  return inside;
}

void classify_nodes(VoxelGrid& grid, const std::vector<bool>& inside) {
  const std::size_t n = grid.node_count();
  std::vector<char> reached(n, 0);
  std::deque<std::size_t> queue;
  for (int k = 0; k < grid.nz(); ++k) {
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        const bool shell = i == 0 || j == 0 || k == 0 || i == grid.nx() - 1 || j == grid.ny() - 1 ||
                           k == grid.nz() - 1;
        const std::size_t idx = grid.index(i, j, k);
        if (shell && !inside[idx]) {
          reached[idx] = 1;
          queue.push_back(idx);
        }
      }
    }
  }
  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    for_each_neighbor(grid, idx, [&](std::size_t m) {
      if (!reached[m] && !inside[m]) {
        reached[m] = 1;
        queue.push_back(m);
      }
    });
  }

  for (std::size_t idx = 0; idx < n; ++idx) {
    if (reached[idx]) {
      grid.set_flag(idx, NodeFlag::Exterior);
      continue;
    }
    bool touches_exterior = false;
    for_each_neighbor(grid, idx, [&](std::size_t m) { touches_exterior |= reached[m] != 0; });
    grid.set_flag(idx, touches_exterior ? NodeFlag::Boundary : NodeFlag::Interior);
  }
  // A boundary node that seals nothing belongs outside.
  std::vector<std::size_t> demote;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (grid.flag(idx) != NodeFlag::Boundary) continue;
    bool touches_interior = false;
    for_each_neighbor(grid, idx, [&](std::size_t m) {
      touches_interior |= grid.flag(m) == NodeFlag::Interior || grid.flag(m) == NodeFlag::Center;
    });
    if (!touches_interior) demote.push_back(idx);
  }
  for (std::size_t idx : demote) grid.set_flag(idx, NodeFlag::Exterior);

  // Interior must be one non-empty 6-connected component.
  std::size_t interior = 0, first = n;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (grid.flag(idx) == NodeFlag::Interior || grid.flag(idx) == NodeFlag::Center) {
      if (first == n) first = idx;
      ++interior;
    }
  }
  if (interior == 0) throw ResolutionTooCoarse("no interior node at this resolution");
  std::vector<char> seen(n, 0);
  seen[first] = 1;
  queue.push_back(first);
  std::size_t visited = 0;
  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    ++visited;
    for_each_neighbor(grid, idx, [&](std::size_t m) {
      if (!seen[m] && (grid.flag(m) == NodeFlag::Interior || grid.flag(m) == NodeFlag::Center)) {
        seen[m] = 1;
        queue.push_back(m);
      }
    });
  }
  if (visited != interior) {
    throw ResolutionTooCoarse("interior splits into disconnected pieces (" + std::to_string(visited) + " of " +
                              std::to_string(interior) + " nodes reachable)");
  }
  grid.refresh_exterior_layers();
}

VoxelGrid discretize(const SurfaceMesh& mesh, const GridConfig& cfg) {
  VoxelGrid grid = make_lattice(mesh.bounding_box(), cfg);
  classify_nodes(grid, inside_mask(mesh, grid));
  apply_boundary_conditions(grid, cfg);
  return grid;
}

std::vector<int> chamfer_distance(const VoxelGrid& grid) {
  constexpr int kInf = std::numeric_limits<int>::max() / 2;
  const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  std::vector<int> dist(grid.node_count(), kInf);
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    if (grid.flag(idx) == NodeFlag::Boundary) dist[idx] = 0;
  }

  // Half of the 26-neighbourhood preceding a node in raster order; the
  // backward pass mirrors it.
  struct Step {
    int di, dj, dk, w;
  };
  std::vector<Step> forward;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const bool before = dk < 0 || (dk == 0 && (dj < 0 || (dj == 0 && di < 0)));
        if (!before) continue;
        const int order = std::abs(di) + std::abs(dj) + std::abs(dk);
        forward.push_back({di, dj, dk, order == 1 ? 3 : (order == 2 ? 4 : 5)});
      }

  auto relax = [&](int i, int j, int k, int sign) {
    int& d = dist[grid.index(i, j, k)];
    for (const Step& s : forward) {
      const int a = i + sign * s.di, b = j + sign * s.dj, c = k + sign * s.dk;
      if (!grid.contains(a, b, c)) continue;
      d = std::min(d, dist[grid.index(a, b, c)] + s.w);
    }
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) relax(i, j, k, 1);
  for (int k = nz - 1; k >= 0; --k)
    for (int j = ny - 1; j >= 0; --j)
      for (int i = nx - 1; i >= 0; --i) relax(i, j, k, -1);
  return dist;
}

std::size_t choose_center(VoxelGrid& grid) {
  const std::vector<int> dist = chamfer_distance(grid);
  std::optional<std::size_t> best;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    const NodeFlag f = grid.flag(idx);
    if (f != NodeFlag::Interior && f != NodeFlag::Center) continue;
    if (!best || dist[idx] > dist[*best]) best = idx;
  }
  if (!best) throw NoInterior("grid has no interior node to serve as the shape center");
  grid.set_center(*best);
  grid.set_phi(*best, 0.0);
  return *best;
}

double center_clearance(const VoxelGrid& grid) {
  const auto c = grid.center();
  if (!c) throw NoInterior("grid has no center");
  return chamfer_distance(grid)[*c] / 3.0 * grid.spacing();
}

std::size_t center_near(VoxelGrid& grid, const Vec3& point) {
  const Vec3 rel = (point - grid.origin()) / grid.spacing();
  const int i = static_cast<int>(std::lround(rel.x));
  const int j = static_cast<int>(std::lround(rel.y));
  const int k = static_cast<int>(std::lround(rel.z));
  if (!grid.contains(i, j, k)) throw NoInterior("requested center lies outside the grid");
  const std::size_t idx = grid.index(i, j, k);
  if (grid.flag(idx) != NodeFlag::Interior && grid.flag(idx) != NodeFlag::Center) {
    throw NoInterior("node nearest the requested center is not an interior node");
  }
  grid.set_center(idx);
  grid.set_phi(idx, 0.0);
  return idx;
}

void apply_boundary_conditions(VoxelGrid& grid, const GridConfig& cfg) {
  cfg.validate();
  grid.set_guard_layers(cfg.guard_layers);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    switch (grid.flag(idx)) {
      case NodeFlag::Boundary:
        grid.set_phi(idx, 1.0);
        break;
      case NodeFlag::Center:
        grid.set_phi(idx, 0.0);
        break;
      case NodeFlag::Exterior: {
        const int layer = std::min(grid.exterior_layer(idx), cfg.guard_layers);
        grid.set_phi(idx, 1.0 + layer * cfg.epsilon);
        break;
      }
      case NodeFlag::Interior:
        grid.set_phi(idx, cfg.interior_init == InteriorInit::Constant ? cfg.interior_value : uniform(rng));
        break;
    }
  }
}

}  // namespace harmap
