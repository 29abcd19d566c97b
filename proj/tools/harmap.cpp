// Command-line front end: generate, run, probe, atlas, invert.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 a stage failed.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "harmap/field_sampler.hpp"
#include "harmap/mesh_io.hpp"
#include "harmap/pipeline.hpp"
#include "harmap/shapes.hpp"
#include "harmap/spherical_mapper.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string number_text(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

int cmd_generate(const std::string& kind_name, const harmap::ShapeParams& params, const std::string& out_path) {
  const harmap::ShapeKind kind = harmap::parse_shape_kind(kind_name);
  params.validate(kind);
  const harmap::SurfaceMesh mesh = harmap::generate_shape(kind, params);
  harmap::write_mesh(mesh, out_path);
  std::cerr << "wrote " << harmap::to_string(kind) << " with " << mesh.vertex_count() << " vertices and "
            << mesh.triangle_count() << " triangles to " << out_path << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& input,
            const std::map<std::string, std::string>& overrides, const std::vector<std::string>& sets) {
  harmap::PipelineConfig cfg;
  if (!config_path.empty()) cfg = harmap::load_config(config_path);
  if (!input.empty()) cfg.input = input;
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw harmap::ConfigError("--set expects key=value, got '" + kv + "'");
    harmap::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : overrides) harmap::apply_setting(cfg, key, value);

  try {
    const harmap::PipelineReport report = harmap::run_pipeline(cfg);
    if (report.solve) std::cout << harmap::solve_report_json(*report.solve) << '\n';
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
    const auto& d = *report.atlas;
    std::cerr << "atlas: " << d.checked_triangles << " triangles checked, " << d.flipped_triangles
              << " flipped, min separation " << d.min_separation << " rad, " << d.failed_seeds.size()
              << " failed seeds\n";
    if (report.round_trip) {
      std::cerr << "round trip: max " << report.round_trip->max_error << "h over " << report.round_trip->samples
                << " points, " << report.round_trip->failures << " failures\n";
    }
    std::cerr << "outputs in " << cfg.output_dir.string() << '\n';
    return 0;
  } catch (const harmap::StageError& e) {
    if (e.report().solve) std::cout << harmap::solve_report_json(*e.report().solve) << '\n';
    std::cerr << "stage " << e.stage() << " failed (" << harmap::to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitStage;
  }
}

int cmd_probe(const std::string& field_path, const std::vector<std::string>& points, const std::string& mode) {
  const harmap::GradientMode gradient = harmap::parse_gradient_mode(mode);
  std::vector<harmap::Vec3> queries;
  for (const std::string& p : points) queries.push_back(harmap::parse_vec3(p));
  const harmap::VoxelGrid grid = harmap::read_field(field_path);
  const harmap::FieldSampler sampler(grid, gradient);
  int status = 0;
  for (const harmap::Vec3& q : queries) {
    try {
      const harmap::FieldSample s = sampler.sample(q);
      std::cout << "{\"point\":[" << number_text(q.x) << ',' << number_text(q.y) << ',' << number_text(q.z)
                << "],\"phi\":" << number_text(s.phi) << ",\"gradient\":[" << number_text(s.gradient.x) << ','
                << number_text(s.gradient.y) << ',' << number_text(s.gradient.z) << "]}\n";
    } catch (const harmap::Error& e) {
      std::cerr << "probe " << q << ": " << e.what() << '\n';
      status = kExitStage;
    }
  }
  return status;
}

int cmd_atlas(const std::string& csv_path, const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw harmap::IoError("cannot read '" + csv_path + "'");
  const auto entries = harmap::read_atlas_csv(in);
  std::ofstream out(svg_path);
  if (!out) throw harmap::IoError("cannot write '" + svg_path + "'");
  harmap::write_atlas_svg(entries, out);
  std::cerr << "wrote " << entries.size() << " atlas points to " << svg_path << '\n';
  return 0;
}

int cmd_invert(const std::string& field_path, const std::string& lines_path, const harmap::MapperConfig& mapper) {
  const harmap::VoxelGrid grid = harmap::read_field(field_path);
  std::ifstream in(lines_path);
  if (!in) throw harmap::IoError("cannot read '" + lines_path + "'");
  const auto lines = harmap::read_streamlines_jsonl(in);
  const harmap::ParamTable table(grid, lines, mapper);

  int status = 0;
  std::string raw;
  int line_no = 0;
  while (std::getline(std::cin, raw)) {
    ++line_no;
    std::replace(raw.begin(), raw.end(), ',', ' ');
    std::istringstream fields(raw);
    harmap::ParamTriple t;
    if (!(fields >> t.phi)) continue;  // blank line
    if (!(fields >> t.theta >> t.psi)) {
      std::cerr << "line " << line_no << ": expected phi theta psi\n";
      status = kExitStage;
      continue;
    }
    try {
      const harmap::Vec3 p = table.inverse_map(t);
      std::cout << number_text(p.x) << ' ' << number_text(p.y) << ' ' << number_text(p.z) << '\n';
    } catch (const harmap::Error& e) {
      std::cerr << "line " << line_no << ": " << e.what() << '\n';
      status = kExitStage;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic volumetric parameterization of genus-0 solids"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic test solid as OFF");
  std::string shape_kind;
  std::string gen_out;
  harmap::ShapeParams shape;
  std::string half_extents;
  gen->add_option("--shape", shape_kind, "sphere, box, two_lobe, star5 or lshape")->required();
  gen->add_option("-o,--out", gen_out, "Output OFF path")->required();
  gen->add_option("--subdivision", shape.subdivision, "Icosphere subdivision level")->capture_default_str();
  gen->add_option("--radius", shape.radius, "Sphere radius, star5 base radius")->capture_default_str();
  gen->add_option("--half-extents", half_extents, "Box half extents x,y,z");
  gen->add_option("--lobe-ratio", shape.lobe_ratio, "star5 tip over base radius")->capture_default_str();
  gen->add_option("--lobe-sharpness", shape.lobe_sharpness, "star5 lobe exponent")->capture_default_str();
  gen->add_option("--flatten", shape.flatten, "star5 vertical squash")->capture_default_str();
  gen->add_option("--radius-a", shape.radius_a, "two_lobe first radius")->capture_default_str();
  gen->add_option("--radius-b", shape.radius_b, "two_lobe second radius")->capture_default_str();
  gen->add_option("--separation", shape.separation, "two_lobe center distance")->capture_default_str();
  gen->add_option("--limb-length", shape.limb_length, "lshape limb length")->capture_default_str();
  gen->add_option("--thick-limb", shape.thick_limb, "lshape thick limb width")->capture_default_str();
  gen->add_option("--thin-limb", shape.thin_limb, "lshape thin limb width")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline on a mesh");
  std::string config_path;
  std::string input;
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;
  run->add_option("input", input, "Input mesh (.off or .obj); overrides the config's input");
  run->add_option("-c,--config", config_path, "key = value config file");
  run->add_option("--set", sets, "Extra key=value override (repeatable)");
  for (const std::string& key : harmap::config_keys()) {
    if (key == "input") continue;
    run->add_option_function<std::string>(
        flag_name(key), [&overrides, key](const std::string& v) { overrides[key] = v; }, "Config key " + key);
  }
  run->add_option_function<std::string>(
      "-o,--output", [&overrides](const std::string& v) { overrides["output_dir"] = v; }, "Same as --output-dir");
  run->add_option_function<std::string>(
      "--round-trip", [&overrides](const std::string& v) { overrides["round_trip_samples"] = v; },
      "Same as --round-trip-samples");

  // probe
  auto* probe = app.add_subcommand("probe", "Sample phi and its gradient from a field file");
  std::string probe_field;
  std::vector<std::string> probe_points;
  std::string probe_mode = "analytic";
  probe->add_option("field", probe_field, "Field file written by run")->required();
  probe->add_option("--probe", probe_points, "Query point x,y,z (repeatable)")->required();
  probe->add_option("--gradient", probe_mode, "analytic or nodal")->capture_default_str();

  // atlas
  auto* atlas = app.add_subcommand("atlas", "Re-render the atlas SVG from a CSV");
  std::string atlas_csv;
  std::string atlas_svg;
  atlas->add_option("csv", atlas_csv, "Atlas CSV")->required();
  atlas->add_option("-o,--out", atlas_svg, "Output SVG")->required();

  // invert
  auto* invert = app.add_subcommand("invert", "Map 'phi theta psi' lines from standard input to positions");
  std::string invert_field;
  std::string invert_lines;
  harmap::MapperConfig mapper;
  invert->add_option("field", invert_field, "Field file written by run")->required();
  invert->add_option("streamlines", invert_lines, "Streamline dump written by run")->required();
  invert->add_option("--k", mapper.k, "Streamlines averaged per query")->capture_default_str();
  invert->add_option("--sample-spacing", mapper.sample_spacing, "Resampling step in grid units")
      ->capture_default_str();
  invert->add_option("--max-angle", mapper.max_angle, "Largest accepted angular gap (rad)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      if (!half_extents.empty()) shape.half_extents = harmap::parse_vec3(half_extents);
      return cmd_generate(shape_kind, shape, gen_out);
    }
    if (*run) return cmd_run(config_path, input, overrides, sets);
    if (*probe) return cmd_probe(probe_field, probe_points, probe_mode);
    if (*atlas) return cmd_atlas(atlas_csv, atlas_svg);
    if (*invert) {
      try {
        mapper.validate();
      } catch (const harmap::InvalidParams& e) {
        throw harmap::ConfigError(e.what());
      }
      return cmd_invert(invert_field, invert_lines, mapper);
    }
  } catch (const harmap::Error& e) {
    const bool config = e.kind() == harmap::ErrorKind::Config || e.kind() == harmap::ErrorKind::InvalidParams;
    std::cerr << "error (" << harmap::to_string(e.kind()) << "): " << e.what() << '\n';
    return config ? kExitConfig : kExitStage;
  }
  return 0;
}
