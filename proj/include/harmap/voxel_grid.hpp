#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "harmap/vec3.hpp"

namespace harmap {

class SurfaceMesh;
struct BoundingBox;

enum class NodeFlag : std::uint8_t { Exterior, Boundary, Interior, Center };

char flag_letter(NodeFlag flag);

enum class InteriorInit { Constant, SeededRandom };

struct GridConfig {
  /// Nodes spanning the longest edge of the mesh bounding box.
  int resolution = 32;
  /// Empty node layers added beyond the bounding box on every side.
  int padding = 5;
  double epsilon = 1.0e-4;
  int guard_layers = 4;

  InteriorInit interior_init = InteriorInit::Constant;
  double interior_value = 0.5;
  std::uint64_t seed = 1;

  /// Throws InvalidParams.
  void validate() const;
};

struct GridIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  friend constexpr bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Regular cubical lattice with per-node classification and potential.
///
/// Exterior nodes also carry their 6-connected layer distance from the
/// Boundary set: layer 1 is the shell just outside the boundary. Layers
/// 1..guard_layers hold the guard potentials; anything farther is frozen and
/// treated as undefined by the sampler.
class VoxelGrid {
 public:
  static constexpr int kUnreachedLayer = 1 << 20;

  VoxelGrid() = default;
  VoxelGrid(std::array<int, 3> dims, Vec3 origin, double spacing);

  const std::array<int, 3>& dims() const { return dims_; }
  int nx() const { return dims_[0]; }
  int ny() const { return dims_[1]; }
  int nz() const { return dims_[2]; }
  std::size_t node_count() const { return flags_.size(); }
  bool empty() const { return flags_.empty(); }
  const Vec3& origin() const { return origin_; }
  double spacing() const { return spacing_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }
  std::size_t index(const GridIndex& g) const { return index(g.i, g.j, g.k); }
  GridIndex coords(std::size_t idx) const;
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }
  Vec3 position(int i, int j, int k) const {
    return origin_ + Vec3(i * spacing_, j * spacing_, k * spacing_);
  }
  Vec3 position(std::size_t idx) const {
    const GridIndex g = coords(idx);
    return position(g.i, g.j, g.k);
  }
  /// Offsets of the six face neighbours in linearized index space.
  std::array<std::ptrdiff_t, 6> neighbor_offsets() const;

  NodeFlag flag(std::size_t idx) const { return flags_[idx]; }
  void set_flag(std::size_t idx, NodeFlag f) { flags_[idx] = f; }
  std::span<const NodeFlag> flags() const { return flags_; }

  double phi(std::size_t idx) const { return phi_[idx]; }
  void set_phi(std::size_t idx, double value) { phi_[idx] = value; }
  std::span<const double> phi() const { return phi_; }
  std::span<double> phi_mut() { return phi_; }

  int exterior_layer(std::size_t idx) const { return layers_[idx]; }
  int guard_layers() const { return guard_layers_; }
  void set_guard_layers(int n) { guard_layers_ = n; }

  /// Interior nodes are the only ones the solver updates.
  bool is_fixed(std::size_t idx) const { return flags_[idx] != NodeFlag::Interior; }
  /// True when the node carries a meaningful potential (anything but the far
  /// exterior beyond the guard layers).
  bool is_defined(std::size_t idx) const {
    return flags_[idx] != NodeFlag::Exterior || layers_[idx] <= guard_layers_;
  }

  std::optional<std::size_t> center() const { return center_; }
  /// Flags `idx` as the Center and demotes any previous center to Interior.
  void set_center(std::size_t idx);

  /// Recomputes exterior layer distances by BFS from the Boundary set.
  void refresh_exterior_layers();

  std::size_t count(NodeFlag f) const;

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  std::array<int, 3> dims_{0, 0, 0};
  Vec3 origin_;
  double spacing_ = 0.0;
  std::vector<NodeFlag> flags_;
  std::vector<double> phi_;
  std::vector<int> layers_;
  int guard_layers_ = 0;
  std::optional<std::size_t> center_;
};

/// Empty (all-exterior) lattice sized for the bounding box: equal spacing set
/// by the longest box edge, a node at the box center, `padding` extra layers.
VoxelGrid make_lattice(const BoundingBox& box, const GridConfig& cfg);

/// Per-node point-in-solid test against the mesh (ray parity along +x with
/// symbolic perturbation for exact hits).
std::vector<bool> inside_mask(const SurfaceMesh& mesh, const VoxelGrid& lattice);

/// Classifies every node from an inside mask: exterior by 6-connected flood
/// fill from the grid shell over outside nodes, boundary = enclosed nodes
/// touching the exterior, interior = the rest. Boundary nodes without an
/// interior neighbour are returned to the exterior.
/// Throws ResolutionTooCoarse if the interior is empty or disconnected.
void classify_nodes(VoxelGrid& grid, const std::vector<bool>& inside);

/// Full discretization: lattice, inside test, classification, initial
/// potentials. No center is chosen yet.
VoxelGrid discretize(const SurfaceMesh& mesh, const GridConfig& cfg);

/// 3-4-5 chamfer distance (in chamfer units) from every node to the nearest
/// Boundary node, by the classic two-pass raster scan.
std::vector<int> chamfer_distance(const VoxelGrid& grid);

/// Picks the Interior/Center node with the largest chamfer distance (ties:
/// smallest index), flags it Center and zeroes its potential.
/// Throws NoInterior.
std::size_t choose_center(VoxelGrid& grid);

/// Chamfer distance from the Center node to the boundary, in model units
/// (one face step of the 3-4-5 metric counts as one spacing).
/// Throws NoInterior when no center is set.
double center_clearance(const VoxelGrid& grid);

/// Nearest Interior/Center node to a point, used for a user-supplied center.
/// Throws NoInterior if the nearest node is not inside the domain.
std::size_t center_near(VoxelGrid& grid, const Vec3& point);

/// Dirichlet data: Boundary 1, Center 0, guard layer k at 1 + k*eps, far
/// exterior at 1 + guard_layers*eps; interior initialized per cfg.
void apply_boundary_conditions(VoxelGrid& grid, const GridConfig& cfg);

}  // namespace harmap
