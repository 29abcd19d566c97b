#pragma once

#include <string>

#include "harmap/mesh_io.hpp"

namespace harmap {

enum class ShapeKind { Sphere, Box, TwoLobe, Star5, LShape };

ShapeKind parse_shape_kind(const std::string& name);
const char* to_string(ShapeKind kind);

/// Parameters for the synthetic solids. Every shape is the radial graph of a
/// subdivided icosahedron over a star-shaped solid, so it inherits the
/// icosphere's closed genus-0 connectivity.
struct ShapeParams {
  int subdivision = 3;

  double radius = 1.0;  // sphere, star5 base radius
  Vec3 half_extents{1.0, 1.0, 1.0};  // box

  // star5: tip radius over base radius, lobe sharpness exponent and the
  // vertical squash applied to the whole solid.
  double lobe_ratio = 2.0;
  double lobe_sharpness = 1.0;
  double flatten = 0.7;

  // two_lobe: centers at (-separation/2, 0, 0) and (+separation/2, 0, 0).
  double radius_a = 0.8;
  double radius_b = 0.65;
  double separation = 1.2;

  // lshape: thick limb along +x, thin limb along +y, both from the origin.
  double limb_length = 2.5;
  double thick_limb = 1.4;
  double thin_limb = 1.0;

  /// Throws InvalidParams.
  void validate(ShapeKind kind) const;
};

/// Icosahedron subdivided `level` times and projected to the unit sphere:
/// 10 * 4^level + 2 vertices, outward-facing triangles.
SurfaceMesh icosphere(int level);

SurfaceMesh generate_shape(ShapeKind kind, const ShapeParams& params);

}  // namespace harmap
