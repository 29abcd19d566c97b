#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "harmap/error.hpp"
#include "harmap/laplace_solver.hpp"
#include "harmap/mesh_io.hpp"
#include "harmap/spherical_mapper.hpp"
#include "harmap/streamline_tracer.hpp"
#include "harmap/voxel_grid.hpp"

namespace harmap {

struct PipelineConfig {
  std::filesystem::path input;
  /// Empty means: guess from the input extension.
  std::optional<MeshFormat> format;
  std::filesystem::path output_dir = "harmap_out";

  GridConfig grid;
  SolverConfig solver;
  TracerConfig tracer;
  MapperConfig mapper;

  /// Streamlines stop inside a ball around the center whose radius is this
  /// fraction of the center's distance to the boundary; 0 leaves only the
  /// terminal_phi test.
  double terminal_fraction = 0.5;
  std::optional<Vec3> center;

  /// Defaults to <output_dir>/streamlines.jsonl.
  std::optional<std::filesystem::path> streamline_dump;
  /// Random interior points pushed through parameterize_point and
  /// inverse_map after the atlas; 0 skips the check.
  int round_trip_samples = 0;
  std::uint64_t round_trip_seed = 1;
  /// Caps worker threads in every stage; 0 lets the runtime decide.
  int threads = 0;

  PipelineConfig();

  /// Validates every nested config. Throws ConfigError.
  std::vector<std::string> validate() const;
};

/// Sets one key from a config file or command-line override. Throws
/// ConfigError for unknown keys and malformed values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Reads "key = value" lines. Blank lines, '#' comments and "[section]"
/// headers are skipped; values may be double-quoted. Throws ConfigError.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Every key apply_setting understands, in documentation order.
const std::vector<std::string>& config_keys();

/// "x,y,z" with optional spaces. Throws ConfigError.
Vec3 parse_vec3(const std::string& text);
GradientMode parse_gradient_mode(const std::string& text);
const char* to_string(GradientMode mode);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RoundTripStats {
  int samples = 0;
  int failures = 0;
  /// Errors in grid spacings.
  double max_error = 0.0;
  double mean_error = 0.0;
};

struct PipelineReport {
  bool ok = false;
  /// Stage that failed (empty on success).
  std::string failed_stage;
  std::string error_kind;
  std::string error_message;

  std::size_t mesh_vertices = 0;
  std::size_t mesh_triangles = 0;
  std::array<int, 3> dims{0, 0, 0};
  double spacing = 0.0;
  std::size_t interior_nodes = 0;
  std::size_t boundary_nodes = 0;
  std::optional<Vec3> center;
  double terminal_distance = 0.0;

  std::optional<SolveReport> solve;
  std::optional<BatchReport> trace;
  std::vector<std::pair<std::string, std::size_t>> terminations;
  std::optional<AtlasDiagnostics> atlas;
  std::optional<RoundTripStats> round_trip;

  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> artifacts;
};

std::string solve_report_json(const SolveReport& report);
std::string pipeline_report_json(const PipelineReport& report);

/// A module error with the pipeline stage it came from. The report holds
/// everything that completed before the failure.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message, PipelineReport report)
      : Error(kind, message), stage_(std::move(stage)), report_(std::move(report)) {}

  const std::string& stage() const { return stage_; }
  const PipelineReport& report() const { return report_; }

 private:
  std::string stage_;
  PipelineReport report_;
};

/// In-memory results of the computational stages.
struct PipelineRun {
  VoxelGrid grid;
  std::size_t center_node = 0;
  Vec3 center;
  TraceBatch batch;
  Atlas atlas;
  PipelineReport report;
};

/// discretize -> center -> boundary conditions -> solve -> trace -> atlas
/// (-> round trip), without touching the file system. Throws StageError.
PipelineRun run_stages(const SurfaceMesh& mesh, const PipelineConfig& cfg);

/// Loads the mesh, runs every stage and writes the field file, atlas CSV
/// and SVG, mapped-sphere OFF, streamline dump and report.json into the
/// output directory. On failure report.json is still written (when the
/// directory is usable) and StageError is thrown.
PipelineReport run_pipeline(const PipelineConfig& cfg);

/// One JSON object per line: {seed_vertex, termination, points: [[x,y,z,phi], ...]}.
void write_streamlines_jsonl(const TraceBatch& batch, std::ostream& out);
/// Inverse of write_streamlines_jsonl; slot seed_vertex of the result holds
/// that record. Throws ParseError.
std::vector<std::optional<Streamline>> read_streamlines_jsonl(std::istream& in);

}  // namespace harmap
