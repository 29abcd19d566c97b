#pragma once

#include <array>

#include "harmap/vec3.hpp"
#include "harmap/voxel_grid.hpp"

namespace harmap {

/// Local trilinear fit of one lattice cell in world coordinates:
///   phi(x,y,z) = p1*xyz + p2*xy + p3*yz + p4*zx + p5*x + p6*y + p7*z + p8
struct TrilinearCell {
  std::array<double, 8> p{};
  GridIndex cell;

  double value(const Vec3& q) const;
  Vec3 gradient(const Vec3& q) const;
};

/// Fits the cell whose minimum corner is `cell`. Throws UndefinedCorner if a
/// corner lies in the far exterior, OutOfDomain if the cell is off the grid.
TrilinearCell fit_cell(const VoxelGrid& grid, const GridIndex& cell);

struct FieldSample {
  double phi = 0.0;
  Vec3 gradient;
};

/// How sample() obtains the gradient. Analytic differentiates the cell's
/// trilinear fit, whose normal component jumps across faces. Nodal blends
/// per-node differences with the same trilinear weights, which makes the
/// gradient continuous; cells touching the Center node keep the analytic
/// gradient because differences across the sink cancel.
enum class GradientMode { Analytic, Nodal };

/// Read-only point queries against a grid. Evaluation uses cell-local
/// trilinear weights, which is the same interpolant as TrilinearCell.
class FieldSampler {
 public:
  explicit FieldSampler(const VoxelGrid& grid, GradientMode mode = GradientMode::Analytic)
      : grid_(&grid), mode_(mode) {}

  const VoxelGrid& grid() const { return *grid_; }

  /// Cell containing the point (points on the far grid face belong to the
  /// last cell). Throws OutOfDomain outside the lattice.
  GridIndex cell_of(const Vec3& point) const;
  /// True if the point is on the lattice and its cell has 8 defined corners.
  bool in_domain(const Vec3& point) const;

  double sample_phi(const Vec3& point) const;
  Vec3 sample_gradient(const Vec3& point) const;
  FieldSample sample(const Vec3& point) const;

  /// Difference-quotient gradient at a node: central where both axis
  /// neighbours on the node's side of the surface are usable, one-sided
  /// where only one is.
  Vec3 node_gradient(std::size_t idx) const;

 private:
  const VoxelGrid* grid_;
  GradientMode mode_;
};

}  // namespace harmap
