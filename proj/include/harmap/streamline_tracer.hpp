#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "harmap/error.hpp"
#include "harmap/field_sampler.hpp"
#include "harmap/vec3.hpp"
#include "harmap/voxel_grid.hpp"

namespace harmap {

class SurfaceMesh;

struct TracerConfig {
  double eta = 1.0;
  double rk_abs_tol = 1.0e-6;
  double rk_rel_tol = 1.0e-6;
  /// Step bounds in multiples of the grid spacing.
  double h_min = 1.0e-4;
  double h_max = 2.0;
  double terminal_phi = 0.1;
  /// Stop once the line is within this distance of the center (model
  /// units); 0 disables the test.
  double terminal_distance = 0.0;
  GradientMode gradient = GradientMode::Analytic;
  std::size_t max_steps = 100'000;
  /// trace_all fails when more than this fraction of seeds fail.
  double max_failure_fraction = 0.05;
  int threads = 0;

  /// Throws InvalidParams.
  void validate() const;
};

enum class Termination { ReachedTerminalPhi, ReachedCenterCell, ReachedTerminalDistance, Stalled, StepLimit };

const char* to_string(Termination t);

struct Streamline {
  std::size_t seed_vertex = 0;
  std::vector<Vec3> points;
  std::vector<double> phis;
  Termination termination = Termination::ReachedTerminalPhi;
  /// Pseudo-time of dX/dt = -eta * grad(phi) spent along the line.
  double pseudo_time = 0.0;
};

/// Raised for Stalled and StepLimit terminations; carries the partial line.
class TraceError : public Error {
 public:
  TraceError(ErrorKind kind, const std::string& message, Streamline partial)
      : Error(kind, message), partial_(std::move(partial)) {}

  const Streamline& partial() const { return partial_; }
  const Vec3& last_position() const { return partial_.points.back(); }

 private:
  Streamline partial_;
};

/// Integrates the streamline from `seed` down the potential with an embedded
/// Runge-Kutta-Fehlberg 4(5) pair. Throws OutOfDomain when the seed has no
/// defined field and TraceError for stalls and step exhaustion.
Streamline trace(const VoxelGrid& grid, const Vec3& seed, const TracerConfig& cfg,
                 std::size_t seed_vertex = 0);

struct SeedFailure {
  std::size_t seed_vertex = 0;
  ErrorKind kind = ErrorKind::Stalled;
  std::string message;
  Vec3 last_position;
};

struct BatchReport {
  std::size_t seeds = 0;
  std::vector<SeedFailure> failures;

  double failure_fraction() const {
    return seeds == 0 ? 0.0 : static_cast<double>(failures.size()) / static_cast<double>(seeds);
  }
};

struct TraceBatch {
  /// One slot per mesh vertex, empty where the seed failed.
  std::vector<std::optional<Streamline>> lines;
  BatchReport report;
};

class BatchFailed : public Error {
 public:
  BatchFailed(const std::string& message, BatchReport report)
      : Error(ErrorKind::TooManyFailures, message), report_(std::move(report)) {}

  const BatchReport& report() const { return report_; }

 private:
  BatchReport report_;
};

/// Traces from every mesh vertex. Per-seed failures are collected; throws
/// BatchFailed if their fraction exceeds cfg.max_failure_fraction.
TraceBatch trace_all(const VoxelGrid& grid, const SurfaceMesh& mesh, const TracerConfig& cfg);
TraceBatch trace_all(const VoxelGrid& grid, const std::vector<Vec3>& seeds, const TracerConfig& cfg);

}  // namespace harmap
