#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "harmap/error.hpp"
#include "harmap/voxel_grid.hpp"

namespace harmap {

enum class SolverScheme { Jacobi, GaussSeidel, Sor };

struct SolverConfig {
  double zeta = 1.0e-4;
  std::size_t max_iterations = 1'000'000;
  SolverScheme scheme = SolverScheme::GaussSeidel;
  double omega = 1.5;  // SOR only
  /// Worker threads for the sweeps; 0 lets the runtime decide.
  int threads = 0;
  /// Keep the per-sweep residuals in SolveReport::history.
  bool record_history = false;

  /// Throws InvalidParams; returns advisory warnings (zeta outside the usual
  /// 1e-6..1e-3 range).
  std::vector<std::string> validate() const;
};

/// Parses "jacobi", "gauss-seidel" or "sor:<omega>".
SolverConfig parse_scheme(const std::string& text, SolverConfig base = {});
std::string scheme_name(const SolverConfig& cfg);

struct SolveReport {
  std::size_t iterations = 0;
  /// max |phi_{j+1} - phi_j| over updatable nodes in the last sweep.
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& message, VoxelGrid partial, SolveReport report)
      : Error(ErrorKind::NotConverged, message), partial_(std::move(partial)), report_(report) {}

  const VoxelGrid& partial() const { return partial_; }
  const SolveReport& report() const { return report_; }

 private:
  VoxelGrid partial_;
  SolveReport report_;
};

/// Relaxes the 7-point Laplace stencil phi = (sum of six neighbours)/6 over
/// Interior nodes until the largest per-sweep change drops below zeta.
/// Fixed nodes are read but never written. Throws NotConverged.
SolveReport solve(VoxelGrid& grid, const SolverConfig& cfg);

/// Largest |phi - mean(6 neighbours)| over Interior nodes.
double stencil_residual(const VoxelGrid& grid);

}  // namespace harmap
