#include "harmap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "harmap/field_sampler.hpp"

namespace harmap {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"input", [](PipelineConfig& c, const std::string&, const std::string& v) { c.input = v; }},
      {"format",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (v == "off") {
           c.format = MeshFormat::Off;
         } else if (v == "obj") {
           c.format = MeshFormat::Obj;
         } else if (v == "auto") {
           c.format.reset();
         } else {
           throw ConfigError("bad value '" + v + "' for " + k + " (off, obj, auto)");
         }
       }},
      {"output_dir", [](PipelineConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"resolution",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.grid.resolution = parse_number<int>(k, v); }},
      {"padding",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.grid.padding = parse_number<int>(k, v); }},
      {"epsilon",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.grid.epsilon = parse_number<double>(k, v); }},
      {"guard_layers",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.grid.guard_layers = parse_number<int>(k, v);
       }},
      {"interior_init",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (v == "constant") {
           c.grid.interior_init = InteriorInit::Constant;
         } else if (v == "random") {
           c.grid.interior_init = InteriorInit::SeededRandom;
         } else {
           throw ConfigError("bad value '" + v + "' for " + k + " (constant, random)");
         }
       }},
      {"interior_value",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.grid.interior_value = parse_number<double>(k, v);
       }},
      {"seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.grid.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"center",
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         if (v.empty() || v == "auto") {
           c.center.reset();
         } else {
           c.center = parse_vec3(v);
         }
       }},
      {"zeta",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.solver.zeta = parse_number<double>(k, v); }},
      {"max_iters",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solver.max_iterations = parse_number<std::size_t>(k, v);
       }},
      {"scheme",
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         try {
           c.solver = parse_scheme(v, c.solver);
         } catch (const InvalidParams& e) {
           throw ConfigError(e.what());
         }
       }},
      {"eta", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.tracer.eta = parse_number<double>(k, v); }},
      {"rk_abs_tol",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.tracer.rk_abs_tol = parse_number<double>(k, v);
       }},
      {"rk_rel_tol",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.tracer.rk_rel_tol = parse_number<double>(k, v);
       }},
      {"h_min",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.tracer.h_min = parse_number<double>(k, v); }},
      {"h_max",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.tracer.h_max = parse_number<double>(k, v); }},
      {"terminal_phi",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.tracer.terminal_phi = parse_number<double>(k, v);
       }},
      {"terminal_fraction",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.terminal_fraction = parse_number<double>(k, v);
       }},
      {"gradient",
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.tracer.gradient = parse_gradient_mode(v); }},
      {"max_steps",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.tracer.max_steps = parse_number<std::size_t>(k, v);
       }},
      {"max_failure_fraction",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.tracer.max_failure_fraction = parse_number<double>(k, v);
       }},
      {"k", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.mapper.k = parse_number<int>(k, v); }},
      {"sample_spacing",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.mapper.sample_spacing = parse_number<double>(k, v);
       }},
      {"max_angle",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.mapper.max_angle = parse_number<double>(k, v);
       }},
      {"dump_streamlines",
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         if (v.empty()) {
           c.streamline_dump.reset();
         } else {
           c.streamline_dump = v;
         }
       }},
      {"round_trip_samples",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.round_trip_samples = parse_number<int>(k, v);
       }},
      {"round_trip_seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.round_trip_seed = parse_number<std::uint64_t>(k, v);
       }},
      {"threads",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.threads = parse_number<int>(k, v); }},
      {"record_history",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solver.record_history = parse_bool(k, v);
       }},
  };
  return table;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

}  // namespace

PipelineConfig::PipelineConfig() { tracer.gradient = GradientMode::Nodal; }

std::vector<std::string> PipelineConfig::validate() const {
  std::vector<std::string> warnings;
  try {
    grid.validate();
    warnings = solver.validate();
    tracer.validate();
    mapper.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  if (input.empty()) throw ConfigError("no input mesh given");
  if (output_dir.empty()) throw ConfigError("no output directory given");
  if (!(terminal_fraction >= 0.0 && terminal_fraction < 1.0)) {
    throw ConfigError("terminal_fraction must lie in [0, 1)");
  }
  if (round_trip_samples < 0) throw ConfigError("round_trip_samples must be non-negative");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  return warnings;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [key, setter] : setters()) out.push_back(key);
    return out;
  }();
  return keys;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  std::size_t start = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const auto comma = text.find(',', start);
    if ((axis < 2) != (comma != std::string::npos)) {
      throw ConfigError("expected x,y,z but got '" + text + "'");
    }
    const std::string part = trim(text.substr(start, axis < 2 ? comma - start : std::string::npos));
    v[axis] = parse_number<double>("coordinate", part);
    start = comma + 1;
  }
  return v;
}

GradientMode parse_gradient_mode(const std::string& text) {
  if (text == "analytic") return GradientMode::Analytic;
  if (text == "nodal") return GradientMode::Nodal;
  throw ConfigError("unknown gradient mode '" + text + "' (analytic, nodal)");
}

const char* to_string(GradientMode mode) { return mode == GradientMode::Nodal ? "nodal" : "analytic"; }

std::string solve_report_json(const SolveReport& report) {
  ordered_json j;
  j["iterations"] = report.iterations;
  j["final_residual"] = report.final_residual;
  j["converged"] = report.converged;
  if (!report.history.empty()) j["history"] = report.history;
  return j.dump();
}

std::string pipeline_report_json(const PipelineReport& r) {
  ordered_json j;
  j["ok"] = r.ok;
  if (!r.ok) {
    j["stage"] = r.failed_stage;
    j["error_kind"] = r.error_kind;
    j["error"] = r.error_message;
  }
  j["mesh"] = {{"vertices", r.mesh_vertices}, {"triangles", r.mesh_triangles}};
  j["grid"] = {{"dims", r.dims},
               {"spacing", r.spacing},
               {"interior_nodes", r.interior_nodes},
               {"boundary_nodes", r.boundary_nodes}};
  if (r.center) j["grid"]["center"] = vec_json(*r.center);
  j["grid"]["terminal_distance"] = r.terminal_distance;
  if (r.solve) j["solve"] = ordered_json::parse(solve_report_json(*r.solve));
  if (r.trace) {
    ordered_json failures = ordered_json::array();
    for (const SeedFailure& f : r.trace->failures) {
      failures.push_back({{"seed_vertex", f.seed_vertex},
                          {"kind", to_string(f.kind)},
                          {"message", f.message},
                          {"last_position", vec_json(f.last_position)}});
    }
    j["trace"] = {{"seeds", r.trace->seeds}, {"failures", failures}};
    ordered_json counts = ordered_json::object();
    for (const auto& [name, count] : r.terminations) counts[name] = count;
    j["trace"]["terminations"] = counts;
  }
  if (r.atlas) {
    j["atlas"] = {{"bijective", r.atlas->bijective()},
                  {"min_separation", r.atlas->min_separation},
                  {"closest_pair", {r.atlas->closest_a, r.atlas->closest_b}},
                  {"flipped_triangles", r.atlas->flipped_triangles},
                  {"checked_triangles", r.atlas->checked_triangles},
                  {"failed_seeds", r.atlas->failed_seeds}};
  }
  if (r.round_trip) {
    j["round_trip"] = {{"samples", r.round_trip->samples},
                       {"failures", r.round_trip->failures},
                       {"max_error_h", r.round_trip->max_error},
                       {"mean_error_h", r.round_trip->mean_error}};
  }
  ordered_json timings = ordered_json::object();
  for (const StageTiming& t : r.timings) timings[t.stage] = t.seconds;
  j["timings_s"] = timings;
  j["warnings"] = r.warnings;
  ordered_json artifacts = ordered_json::array();
  for (const auto& p : r.artifacts) artifacts.push_back(p.string());
  j["artifacts"] = artifacts;
  return j.dump(2);
}

void write_streamlines_jsonl(const TraceBatch& batch, std::ostream& out) {
  for (const auto& line : batch.lines) {
    if (!line) continue;
    ordered_json points = ordered_json::array();
    for (std::size_t i = 0; i < line->points.size(); ++i) {
      const Vec3& p = line->points[i];
      points.push_back({p.x, p.y, p.z, line->phis[i]});
    }
    ordered_json rec;
    rec["seed_vertex"] = line->seed_vertex;
    rec["termination"] = to_string(line->termination);
    rec["points"] = std::move(points);
    out << rec.dump() << '\n';
  }
}

std::vector<std::optional<Streamline>> read_streamlines_jsonl(std::istream& in) {
  std::vector<std::optional<Streamline>> lines;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(raw);
      Streamline line;
      line.seed_vertex = rec.at("seed_vertex").get<std::size_t>();
      const std::string term = rec.at("termination").get<std::string>();
      bool known = false;
      for (Termination t : {Termination::ReachedTerminalPhi, Termination::ReachedCenterCell,
                            Termination::ReachedTerminalDistance, Termination::Stalled, Termination::StepLimit}) {
        if (term == to_string(t)) {
          line.termination = t;
          known = true;
        }
      }
      if (!known) throw ParseError("unknown termination '" + term + "'");
      for (const auto& p : rec.at("points")) {
        if (p.size() != 4) throw ParseError("point records need four numbers");
        line.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        line.phis.push_back(p[3].get<double>());
      }
      if (line.points.empty()) throw ParseError("streamline without points");
      if (lines.size() <= line.seed_vertex) lines.resize(line.seed_vertex + 1);
      lines[line.seed_vertex] = std::move(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("streamline record " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("streamline record " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lines;
}

namespace {

// Runs one stage, timing it and re-throwing module errors tagged with the
// stage name.
class StageRunner {
 public:
  explicit StageRunner(PipelineReport& report) : report_(report) {}

  template <typename F>
  auto operator()(const std::string& stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        report_.timings.push_back({stage, seconds_since(start)});
      } else {
        auto result = body();
        report_.timings.push_back({stage, seconds_since(start)});
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      report_.timings.push_back({stage, seconds_since(start)});
      report_.ok = false;
      report_.failed_stage = stage;
      report_.error_kind = to_string(e.kind());
      report_.error_message = e.what();
      throw StageError(stage, e.kind(), e.what(), report_);
    }
  }

 private:
  PipelineReport& report_;
};

RoundTripStats round_trip(const VoxelGrid& grid, const TraceBatch& batch, const PipelineConfig& cfg) {
  const ParamTable table(grid, batch.lines, cfg.mapper);
  std::vector<std::size_t> cells;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    const GridIndex g = grid.coords(idx);
    if (g.i >= grid.nx() - 1 || g.j >= grid.ny() - 1 || g.k >= grid.nz() - 1) continue;
    bool solid = true;
    for (int n = 0; n < 8 && solid; ++n) {
      const NodeFlag f = grid.flag(grid.index(g.i + (n & 1), g.j + ((n >> 1) & 1), g.k + ((n >> 2) & 1)));
      solid = f == NodeFlag::Interior || f == NodeFlag::Center;
    }
    if (solid) cells.push_back(idx);
  }
  RoundTripStats stats;
  if (cells.empty()) return stats;
  std::mt19937_64 rng(cfg.round_trip_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  double total = 0.0;
  int measured = 0;
  for (int n = 0; n < cfg.round_trip_samples; ++n) {
    const GridIndex g = grid.coords(cells[pick(rng)]);
    const Vec3 p = grid.position(g.i, g.j, g.k) + grid.spacing() * Vec3(unit(rng), unit(rng), unit(rng));
    ++stats.samples;
    try {
      const double err = distance(table.inverse_map(table.parameterize_point(p)), p) / grid.spacing();
      stats.max_error = std::max(stats.max_error, err);
      total += err;
      ++measured;
    } catch (const Error&) {
      ++stats.failures;
    }
  }
  stats.mean_error = measured > 0 ? total / measured : 0.0;
  return stats;
}

}  // namespace

PipelineRun run_stages(const SurfaceMesh& mesh, const PipelineConfig& cfg) {
  PipelineRun run;
  PipelineReport& report = run.report;
  report.mesh_vertices = mesh.vertex_count();
  report.mesh_triangles = mesh.triangle_count();
  StageRunner stage(report);

  run.grid = stage("discretize", [&] { return discretize(mesh, cfg.grid); });
  report.dims = run.grid.dims();
  report.spacing = run.grid.spacing();
  report.boundary_nodes = run.grid.count(NodeFlag::Boundary);

  run.center_node = stage("choose_center", [&] {
    return cfg.center ? center_near(run.grid, *cfg.center) : choose_center(run.grid);
  });
  run.center = run.grid.position(run.center_node);
  report.center = run.center;
  report.interior_nodes = run.grid.count(NodeFlag::Interior);

  stage("apply_boundary_conditions", [&] { apply_boundary_conditions(run.grid, cfg.grid); });

  SolverConfig solver = cfg.solver;
  if (cfg.threads > 0) solver.threads = cfg.threads;
  for (const std::string& w : solver.validate()) report.warnings.push_back(w);
  report.solve = stage("solve", [&] { return solve(run.grid, solver); });

  TracerConfig tracer = cfg.tracer;
  if (cfg.threads > 0) tracer.threads = cfg.threads;
  if (cfg.terminal_fraction > 0.0) {
    tracer.terminal_distance = cfg.terminal_fraction * center_clearance(run.grid);
  }
  report.terminal_distance = tracer.terminal_distance;
  run.batch = stage("trace", [&] {
    try {
      return trace_all(run.grid, mesh, tracer);
    } catch (const BatchFailed& e) {
      report.trace = e.report();
      throw;
    }
  });
  report.trace = run.batch.report;
  std::map<std::string, std::size_t> counts;
  for (const auto& line : run.batch.lines) {
    if (line) ++counts[to_string(line->termination)];
  }
  report.terminations.assign(counts.begin(), counts.end());

  run.atlas = stage("atlas", [&] {
    return build_atlas(mesh, run.batch.lines, run.center, tracer.max_failure_fraction);
  });
  report.atlas = run.atlas.diagnostics;

  if (cfg.round_trip_samples > 0) {
    report.round_trip = stage("round_trip", [&] { return round_trip(run.grid, run.batch, cfg); });
  }
  report.ok = true;
  return run;
}

namespace {

std::ofstream open_artifact(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_report_file(const PipelineReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (out) out << pipeline_report_json(report) << '\n';
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  std::vector<std::string> warnings = cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
    throw ConfigError("output directory '" + cfg.output_dir.string() + "' is not usable");
  }
  const std::filesystem::path report_path = cfg.output_dir / "report.json";

  PipelineReport load_report;
  load_report.warnings = warnings;
  StageRunner load_stage(load_report);
  std::optional<SurfaceMesh> mesh;
  try {
    mesh = load_stage("load", [&] {
      MeshLoadStats stats;
      const MeshFormat format = cfg.format ? *cfg.format : format_from_path(cfg.input);
      SurfaceMesh m = load_mesh(cfg.input, format, &stats);
      if (stats.ignored_records > 0) {
        load_report.warnings.push_back("skipped " + std::to_string(stats.ignored_records) + " OBJ records");
      }
      return m;
    });
  } catch (const StageError& e) {
    write_report_file(e.report(), report_path);
    throw;
  }

  PipelineRun run;
  try {
    run = run_stages(*mesh, cfg);
  } catch (const StageError& e) {
    PipelineReport merged = e.report();
    merged.timings.insert(merged.timings.begin(), load_report.timings.begin(), load_report.timings.end());
    merged.warnings.insert(merged.warnings.begin(), load_report.warnings.begin(), load_report.warnings.end());
    write_report_file(merged, report_path);
    throw StageError(e.stage(), e.kind(), e.what(), merged);
  }
  PipelineReport& report = run.report;
  report.timings.insert(report.timings.begin(), load_report.timings.begin(), load_report.timings.end());
  report.warnings.insert(report.warnings.begin(), load_report.warnings.begin(), load_report.warnings.end());

  StageRunner stage(report);
  try {
    stage("write", [&] {
      const auto field = cfg.output_dir / "field.txt";
      write_field(run.grid, field);
      report.artifacts.push_back(field);

      const auto csv = cfg.output_dir / "atlas.csv";
      {
        auto out = open_artifact(csv);
        write_atlas_csv(run.atlas, out);
      }
      report.artifacts.push_back(csv);

      const auto svg = cfg.output_dir / "atlas.svg";
      {
        auto out = open_artifact(svg);
        write_atlas_svg(run.atlas.entries, out);
      }
      report.artifacts.push_back(svg);

      const auto sphere = cfg.output_dir / "sphere.off";
      {
        auto out = open_artifact(sphere);
        write_sphere_off(*mesh, run.atlas, run.center, out);
      }
      report.artifacts.push_back(sphere);

      const auto dump = cfg.streamline_dump.value_or(cfg.output_dir / "streamlines.jsonl");
      {
        auto out = open_artifact(dump);
        write_streamlines_jsonl(run.batch, out);
      }
      report.artifacts.push_back(dump);
      report.artifacts.push_back(report_path);
    });
  } catch (const StageError& e) {
    write_report_file(e.report(), report_path);
    throw;
  }
  write_report_file(report, report_path);
  return report;
}

}  // namespace harmap
