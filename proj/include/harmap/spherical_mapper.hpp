#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

#include "harmap/mesh_io.hpp"
#include "harmap/streamline_tracer.hpp"
#include "harmap/vec3.hpp"

namespace harmap {

/// Volumetric parameter coordinates: potential, polar angle in [0, pi],
/// azimuth in (-pi, pi]. Angles are radians throughout.
struct ParamTriple {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

struct SphericalAngles {
  double theta = 0.0;
  double psi = 0.0;
};

/// theta = atan2(sqrt(x^2 + y^2), z), psi = atan2(y, x) with psi folded into
/// (-pi, pi]. Throws DegenerateEndpoint for |v| < 1e-12.
SphericalAngles cartesian_to_angles(const Vec3& v);

/// Angles of the line's last point as seen from the center.
SphericalAngles endpoint_angles(const Streamline& line, const Vec3& center);

/// Unit-sphere image (r = 1) of a parameter triple; phi is ignored.
Vec3 to_sphere(const ParamTriple& t);
Vec3 to_sphere(const SphericalAngles& a);

/// Great-circle distance between two angle pairs.
double angular_distance(const SphericalAngles& a, const SphericalAngles& b);

struct AtlasEntry {
  std::size_t vertex = 0;
  ParamTriple param;
};

struct AtlasDiagnostics {
  /// Smallest great-circle separation among mapped vertices (pi when fewer
  /// than two are mapped).
  double min_separation = std::numbers::pi;
  std::size_t closest_a = 0;
  std::size_t closest_b = 0;
  /// Triangles whose spherical image has the minority orientation.
  std::size_t flipped_triangles = 0;
  /// Triangles with all three vertices mapped (the ones that were checked).
  std::size_t checked_triangles = 0;
  std::vector<std::size_t> failed_seeds;

  bool bijective() const { return min_separation > 0.0 && flipped_triangles == 0; }
};

struct Atlas {
  std::vector<AtlasEntry> entries;
  AtlasDiagnostics diagnostics;
};

/// Atlas from one (possibly empty) line per mesh vertex. Throws
/// TooManyFailures when the failed fraction exceeds `max_failure_fraction`.
Atlas build_atlas(const SurfaceMesh& mesh, const std::vector<std::optional<Streamline>>& lines,
                  const Vec3& center, double max_failure_fraction = 0.05);

/// Recomputes separation and flip diagnostics for explicit per-vertex angles
/// (empty = failed).
AtlasDiagnostics atlas_diagnostics(const SurfaceMesh& mesh,
                                   const std::vector<std::optional<SphericalAngles>>& angles);

/// "vertex_id,theta,psi,phi" with 17 significant digits.
void write_atlas_csv(const Atlas& atlas, std::ostream& out);
std::vector<AtlasEntry> read_atlas_csv(std::istream& in);
/// Scatter of the entries over [0, pi] x (-pi, pi].
void write_atlas_svg(const std::vector<AtlasEntry>& entries, std::ostream& out);
/// Input connectivity with every mapped vertex moved to its unit-sphere
/// image; unmapped vertices use their normalized direction from the center.
void write_sphere_off(const SurfaceMesh& mesh, const Atlas& atlas, const Vec3& center,
                      std::ostream& out);

struct MapperConfig {
  /// Neighbours used by both interpolations: samples for the forward map,
  /// streamlines for the inverse map.
  int k = 8;
  /// Streamlines are resampled to at most this spacing (grid units) before
  /// they enter the table.
  double sample_spacing = 0.5;
  /// inverse_map gives up when the nearest streamline direction is farther
  /// than this angle (radians) from the requested one.
  double max_angle = 0.5;

  /// Throws InvalidParams.
  void validate() const;
};

struct SampleRecord {
  Vec3 position;
  ParamTriple param;
  Vec3 direction;  // to_sphere(param), cached
};

/// Forward table of streamline samples tagged with their (phi, theta, psi),
/// the data behind interior parameterization and the inverse map. Samples
/// of one streamline are stored contiguously in order of decreasing phi.
class ParamTable {
 public:
  ParamTable(const VoxelGrid& grid, const std::vector<std::optional<Streamline>>& lines,
             MapperConfig cfg = {});

  const std::vector<SampleRecord>& records() const { return records_; }
  const Vec3& center() const { return center_; }
  const MapperConfig& config() const { return cfg_; }

  /// phi from the sampler, angles from the k nearest samples in space
  /// (inverse-distance weighted unit vectors, renormalized).
  /// Throws OutOfDomain or DegenerateEndpoint (at the center).
  ParamTriple parameterize_point(const Vec3& point) const;

  /// Takes the k streamlines whose directions are nearest to (theta, psi),
  /// finds where each one passes through phi, and averages those points
  /// with inverse angular-distance weights. Below a streamline's last
  /// sample the search continues along the straight ray to the center.
  /// Throws NoNearbySamples.
  Vec3 inverse_map(const ParamTriple& t) const;

 private:
  struct LineRange {
    std::size_t begin, end;  // into records_
  };

  Vec3 point_at_phi(const LineRange& line, double phi) const;

  const VoxelGrid* grid_;
  MapperConfig cfg_;
  Vec3 center_;
  std::vector<SampleRecord> records_;
  std::vector<LineRange> lines_;
};

}  // namespace harmap
