#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "harmap/vec3.hpp"

namespace harmap {

class VoxelGrid;

using Triangle = std::array<int, 3>;

struct BoundingBox {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
};

/// Closed, orientable, genus-0 triangle mesh. The constructor validates the
/// topology, so every SurfaceMesh in existence satisfies the invariants.
class SurfaceMesh {
 public:
  /// Throws TopologyError naming the offending element when the input is
  /// out of range, degenerate, open, non-manifold, inconsistently oriented
  /// or not genus 0.
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const BoundingBox& bounding_box() const { return bbox_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t edge_count() const { return triangles_.size() * 3 / 2; }
  long euler_characteristic() const {
    return static_cast<long>(vertex_count()) - static_cast<long>(edge_count()) +
           static_cast<long>(triangle_count());
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  BoundingBox bbox_;
};

enum class MeshFormat { Off, Obj };

/// Guesses the format from the file extension (.off / .obj, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

struct MeshLoadStats {
  /// OBJ records other than "v" and "f" that were skipped.
  std::size_t ignored_records = 0;
};

SurfaceMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                      MeshLoadStats* stats = nullptr);
SurfaceMesh read_off(std::istream& in);
SurfaceMesh read_obj(std::istream& in, MeshLoadStats* stats = nullptr);

/// Writes OFF with round-trip (max_digits10) precision.
void write_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path);
void write_off(const SurfaceMesh& mesh, std::ostream& out);
void write_off(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles,
               std::ostream& out);

/// Field file: "nx ny nz", "ox oy oz h", then one "flag phi" line per node in
/// x-fastest order with flag in {E, B, I, C}.
void write_field(const VoxelGrid& grid, const std::filesystem::path& path);
void write_field(const VoxelGrid& grid, std::ostream& out);
VoxelGrid read_field(const std::filesystem::path& path);
VoxelGrid read_field(std::istream& in);

}  // namespace harmap
