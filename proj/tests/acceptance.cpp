// Acceptance checks for the whole pipeline. Prints one PASS/FAIL line per
// criterion (plus indented detail and INFO lines) and exits nonzero when any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "harmap/field_sampler.hpp"
#include "harmap/laplace_solver.hpp"
#include "harmap/pipeline.hpp"
#include "harmap/shapes.hpp"
#include "harmap/spherical_mapper.hpp"
#include "harmap/streamline_tracer.hpp"
#include "harmap/voxel_grid.hpp"

using namespace harmap;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;

// Pinned tolerances and run settings.
constexpr int kShapeResolution = 32;
constexpr double kDefaultZeta = 1e-4;
constexpr double kShapeSeconds = 60.0;
constexpr double kOracleZeta = 1e-8;
constexpr double kOracleTolerance = 1e-6;
constexpr double kShellInner = 0.5;  // inner radius over outer radius
constexpr double kShellZeta = 1e-10;
constexpr double kShellRatioLow = 3.0;
constexpr double kShellRatioHigh = 5.0;
constexpr int kRadialResolution = 96;
constexpr double kRadialZeta = 1e-6;
constexpr double kRadialPathDeg = 1.0;
constexpr double kRadialEndpointDeg = 2.0;
constexpr double kClusterThreshold = 0.4;  // radians
constexpr double kInsensitivityDeg = 1.0;
constexpr int kRoundTripSamples = 200;
constexpr int kRoundTripSubdivision = 4;
constexpr double kRoundTripLimit = 2.0;  // grid spacings
constexpr double kSpanTolerance = 1e-10;
constexpr double kGradientTolerance = 1e-5;

const std::vector<ShapeKind> kShapes = {ShapeKind::Sphere, ShapeKind::Box, ShapeKind::TwoLobe, ShapeKind::Star5,
                                        ShapeKind::LShape};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& line) {
    pass = pass && ok;
    details.push_back((ok ? "ok   " : "BAD  ") + line);
  }
  void info(const std::string& line) { details.push_back("INFO " + line); }
};

SurfaceMesh shape_mesh(ShapeKind kind, int subdivision) {
  ShapeParams p;
  p.subdivision = subdivision;
  return generate_shape(kind, p);
}

struct Solved {
  SurfaceMesh mesh;
  VoxelGrid grid;
  GridConfig grid_cfg;
  SolveReport report;
  double seconds = 0.0;
};

Solved solve_shape(ShapeKind kind, int subdivision, int resolution, double zeta) {
  const auto t0 = Clock::now();
  Solved s{shape_mesh(kind, subdivision), {}, {}, {}, 0.0};
  s.grid_cfg.resolution = resolution;
  s.grid = discretize(s.mesh, s.grid_cfg);
  choose_center(s.grid);
  apply_boundary_conditions(s.grid, s.grid_cfg);
  SolverConfig sc;
  sc.zeta = zeta;
  s.report = solve(s.grid, sc);
  s.seconds = seconds_since(t0);
  return s;
}

// ---------------------------------------------------------------- 1 and 2

Outcome maximum_principle_and_residual(bool want_residual) {
  Outcome out;
  for (ShapeKind kind : kShapes) {
    const Solved s = solve_shape(kind, 3, kShapeResolution, kDefaultZeta);
    const VoxelGrid& g = s.grid;
    const auto offsets = g.neighbor_offsets();
    double lo = 1e9, hi = -1e9, lo_far = 1e9, hi_far = -1e9;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
      if (g.flag(idx) != NodeFlag::Interior) continue;
      const double v = g.phi(idx);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      bool touches_guard = false;
      for (auto off : offsets) {
        touches_guard |= g.flag(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off)) == NodeFlag::Exterior;
      }
      if (!touches_guard) {
        lo_far = std::min(lo_far, v);
        hi_far = std::max(hi_far, v);
      }
    }
    const std::string name = to_string(kind);
    if (!want_residual) {
      const double cap = 1.0 + 4.0 * s.grid_cfg.epsilon;
      out.check(lo > 0.0 && hi < cap && s.report.converged,
                name + ": interior phi in [" + fmt(lo, 6) + ", " + fmt(hi, 8) + "], bound (0, " + fmt(cap, 6) + ")");
      out.check(lo_far > 0.0 && hi_far < 1.0,
                name + ": away from guards phi in [" + fmt(lo_far, 6) + ", " + fmt(hi_far, 8) + "]");
      out.check(s.seconds < kShapeSeconds, name + ": " + fmt(s.seconds, 3) + " s for " +
                                               std::to_string(s.report.iterations) + " sweeps");
    } else {
      const double r = stencil_residual(g);
      out.check(r < kDefaultZeta, name + ": max |phi - mean| = " + fmt(r, 4) + " < zeta " + fmt(kDefaultZeta));
    }
  }
  return out;
}

// ---------------------------------------------------------------- 3

Outcome solver_oracle() {
  Outcome out;
  constexpr int n = 9;
  VoxelGrid g({n, n, n}, Vec3(0, 0, 0), 1.0);
  // Faces at 1, middle node pinned at 0.
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const GridIndex c = g.coords(idx);
    const bool shell = c.i == 0 || c.j == 0 || c.k == 0 || c.i == n - 1 || c.j == n - 1 || c.k == n - 1;
    g.set_flag(idx, shell ? NodeFlag::Boundary : NodeFlag::Interior);
    g.set_phi(idx, shell ? 1.0 : 0.5);
  }
  g.set_center(g.index(n / 2, n / 2, n / 2));
  g.set_phi(g.index(n / 2, n / 2, n / 2), 0.0);

  // Dense direct solve of the same 7-point system.
  std::vector<long> unknown(g.node_count(), -1);
  std::vector<std::size_t> nodes;
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.flag(idx) == NodeFlag::Interior) {
      unknown[idx] = static_cast<long>(nodes.size());
      nodes.push_back(idx);
    }
  }
  const std::size_t m = nodes.size();
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (std::size_t row = 0; row < m; ++row) {
    a[row * m + row] = 6.0;
    for (auto off : g.neighbor_offsets()) {
      const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(nodes[row]) + off);
      if (unknown[nb] >= 0) a[row * m + static_cast<std::size_t>(unknown[nb])] -= 1.0;
      else b[row] += g.phi(nb);
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    }
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(a[col * m + c], a[piv * m + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r * m + col] / a[col * m + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < m; ++c) s -= a[i * m + c] * x[c];
    x[i] = s / a[i * m + i];
  }

  for (const char* scheme : {"jacobi", "gauss-seidel", "sor:1.5"}) {
    VoxelGrid work = g;
    SolverConfig sc = parse_scheme(scheme);
    sc.zeta = kOracleZeta;
    const SolveReport rep = solve(work, sc);
    double worst = 0.0;
    for (std::size_t row = 0; row < m; ++row) worst = std::max(worst, std::abs(work.phi(nodes[row]) - x[row]));
    out.check(worst <= kOracleTolerance,
              std::string(scheme) + ": max node gap " + fmt(worst, 3) + " after " + std::to_string(rep.iterations) +
                  " sweeps");
  }
  return out;
}

// ---------------------------------------------------------------- 4

// Max node error of the shell problem a < r < R (R = 1) on a lattice of
// `res` nodes per side spanning [-R, R]. Nodes outside the shell carry the
// exact solution as Dirichlet data.
double shell_error(int res, double a) {
  const double big_r = 1.0;
  const double h = 2.0 * big_r / (res - 1);
  VoxelGrid g({res, res, res}, Vec3(-big_r, -big_r, -big_r), h);
  auto exact = [&](double r) { return (1.0 / a - 1.0 / r) / (1.0 / a - 1.0 / big_r); };
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const double r = norm(g.position(idx));
    const bool inside = r > a && r < big_r;
    g.set_flag(idx, inside ? NodeFlag::Interior : NodeFlag::Boundary);
    g.set_phi(idx, inside ? 0.5 : exact(std::max(r, 1e-12)));
  }
  SolverConfig sc;
  sc.zeta = kShellZeta;
  sc.scheme = SolverScheme::Sor;
  sc.omega = 1.8;
  solve(g, sc);
  double worst = 0.0;
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.flag(idx) != NodeFlag::Interior) continue;
    worst = std::max(worst, std::abs(g.phi(idx) - exact(norm(g.position(idx)))));
  }
  return worst;
}

Outcome analytic_shell() {
  Outcome out;
  const double e16 = shell_error(16, kShellInner);
  const double e32 = shell_error(32, kShellInner);
  const double ratio = e16 / e32;
  out.check(ratio >= kShellRatioLow && ratio <= kShellRatioHigh,
            "a = R/2: e16 = " + fmt(e16) + ", e32 = " + fmt(e32) + ", ratio " + fmt(ratio, 3) + " (want 4 +- 1)");
  const double e64 = shell_error(64, kShellInner);
  out.info("e64 = " + fmt(e64) + ", ratio 32/64 = " + fmt(e32 / e64, 3));
  for (double a : {0.3, 0.4}) {
    out.info("a = " + fmt(a, 2) + "R: ratio 16/32 = " + fmt(shell_error(16, a) / shell_error(32, a), 3));
  }
  return out;
}

// ---------------------------------------------------------------- 5

TracerConfig pipeline_tracer(const VoxelGrid& grid, double fraction) {
  TracerConfig cfg = PipelineConfig().tracer;
  cfg.terminal_distance = fraction * center_clearance(grid);
  return cfg;
}

Outcome radial_streamlines() {
  Outcome out;
  const Solved s = solve_shape(ShapeKind::Sphere, 2, kRadialResolution, kRadialZeta);
  const Vec3 c = s.grid.position(*s.grid.center());
  const TraceBatch batch = trace_all(s.grid, s.mesh, pipeline_tracer(s.grid, 0.5));
  double path = 0.0, endpoint = 0.0;
  std::size_t failed = 0;
  for (const auto& line : batch.lines) {
    if (!line) {
      ++failed;
      continue;
    }
    const Vec3 seed = normalized(line->points.front() - c);
    for (const Vec3& p : line->points) {
      const double cosang = std::clamp(dot(normalized(p - c), seed), -1.0, 1.0);
      path = std::max(path, std::acos(cosang) * kDeg);
    }
    endpoint = std::max(endpoint, angular_distance(endpoint_angles(*line, c), cartesian_to_angles(seed)) * kDeg);
  }
  out.check(failed == 0, std::to_string(batch.lines.size() - failed) + "/" + std::to_string(batch.lines.size()) +
                             " streamlines traced");
  out.check(path < kRadialPathDeg, "max angle between a path point and its seed ray " + fmt(path, 3) + " deg");
  out.check(endpoint < kRadialEndpointDeg, "max endpoint vs seed direction " + fmt(endpoint, 3) + " deg");
  return out;
}

// ---------------------------------------------------------------- 6

// Single-linkage components of `points` under angular distance <= threshold.
std::vector<int> clusters(const std::vector<SphericalAngles>& points, double threshold) {
  std::vector<int> label(points.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < points.size(); ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> stack = {s};
    label[s] = next;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < points.size(); ++v) {
        if (label[v] < 0 && angular_distance(points[u], points[v]) <= threshold) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

Outcome bijectivity() {
  Outcome out;
  for (ShapeKind kind : kShapes) {
    PipelineConfig cfg;
    cfg.grid.resolution = kShapeResolution;
    cfg.solver.zeta = 1e-6;
    const SurfaceMesh mesh = shape_mesh(kind, 2);
    const PipelineRun run = run_stages(mesh, cfg);
    const AtlasDiagnostics& d = run.atlas.diagnostics;
    out.check(d.flipped_triangles == 0 && d.min_separation > 0.0 && d.failed_seeds.empty(),
              std::string(to_string(kind)) + ": " + std::to_string(d.flipped_triangles) + " flipped of " +
                  std::to_string(d.checked_triangles) + ", min separation " + fmt(d.min_separation, 3) + " rad");

    // The denser default mesh puts seeds a fraction of a cell from the
    // reentrant L-shape crease; reported, not judged.
    const PipelineRun dense = run_stages(shape_mesh(kind, 3), cfg);
    out.info(std::string(to_string(kind)) + " with 1280 triangles: " +
             std::to_string(dense.atlas.diagnostics.flipped_triangles) + " flipped, min separation " +
             fmt(dense.atlas.diagnostics.min_separation, 3) + " rad");

    if (kind != ShapeKind::Star5) continue;
    // Lobe tips: vertices well out along the five arms.
    const ShapeParams params;
    const double reach = 0.5 * (1.0 + params.lobe_ratio) * params.radius;
    std::vector<SphericalAngles> tips;
    std::vector<int> lobe;
    for (const AtlasEntry& e : run.atlas.entries) {
      const Vec3& v = mesh.vertices()[e.vertex];
      if (std::hypot(v.x, v.y) < reach) continue;
      tips.push_back({e.param.theta, e.param.psi});
      const long k = std::lround(std::atan2(v.y, v.x) / (2 * kPi / 5));
      lobe.push_back(static_cast<int>(((k % 5) + 5) % 5));
    }
    const std::vector<int> label = clusters(tips, kClusterThreshold);
    const int count = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
    bool pure = true;
    std::set<int> seen;
    for (int c = 0; c < count; ++c) {
      std::set<int> lobes;
      for (std::size_t i = 0; i < tips.size(); ++i) {
        if (label[i] == c) lobes.insert(lobe[i]);
      }
      pure &= lobes.size() == 1;
      seen.insert(lobes.begin(), lobes.end());
    }
    double intra = 0.0, inter = kPi;
    for (std::size_t i = 0; i < tips.size(); ++i) {
      for (std::size_t j = i + 1; j < tips.size(); ++j) {
        const double d2 = angular_distance(tips[i], tips[j]);
        if (lobe[i] == lobe[j]) intra = std::max(intra, d2);
        else inter = std::min(inter, d2);
      }
    }
    out.check(count == 5 && pure && seen.size() == 5,
              "star5: " + std::to_string(tips.size()) + " tip vertices form " + std::to_string(count) +
                  " clusters at " + fmt(kClusterThreshold, 2) + " rad, one per lobe; widest lobe " + fmt(intra, 3) +
                  " rad, closest lobes " + fmt(inter, 3) + " rad");
  }
  return out;
}

// ---------------------------------------------------------------- 7

double max_endpoint_change(const TraceBatch& a, const TraceBatch& b, const Vec3& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    if (!a.lines[i] || !b.lines[i]) return kPi * kDeg;
    worst = std::max(worst, angular_distance(endpoint_angles(*a.lines[i], c), endpoint_angles(*b.lines[i], c)));
  }
  return worst * kDeg;
}

Outcome termination_insensitivity() {
  Outcome out;
  for (ShapeKind kind : {ShapeKind::Sphere, ShapeKind::Star5}) {
    const Solved s = solve_shape(kind, 2, kRadialResolution, kRadialZeta);
    const Vec3 c = s.grid.position(*s.grid.center());
    const std::string name = to_string(kind);

    TracerConfig base = pipeline_tracer(s.grid, 0.5);
    TracerConfig lower = base;
    lower.terminal_phi = 0.05;
    const double phi_change = max_endpoint_change(trace_all(s.grid, s.mesh, base), trace_all(s.grid, s.mesh, lower), c);
    out.check(phi_change < kInsensitivityDeg,
              name + ": terminal_phi 0.1 -> 0.05 moves endpoints by " + fmt(phi_change, 3) + " deg");

    const TracerConfig half = pipeline_tracer(s.grid, 0.25);
    const double ball_change = max_endpoint_change(trace_all(s.grid, s.mesh, base), trace_all(s.grid, s.mesh, half), c);
    out.check(ball_change < kInsensitivityDeg,
              name + ": terminal ball 0.5 -> 0.25 of the center clearance moves endpoints by " +
                  fmt(ball_change, 3) + " deg");

    TracerConfig pure = base;
    pure.terminal_distance = 0.0;
    TracerConfig pure_lower = pure;
    pure_lower.terminal_phi = 0.05;
    const double pure_change =
        max_endpoint_change(trace_all(s.grid, s.mesh, pure), trace_all(s.grid, s.mesh, pure_lower), c);
    out.info(name + ": without the terminal ball, terminal_phi 0.1 -> 0.05 moves endpoints by " +
             fmt(pure_change, 3) + " deg");
  }
  return out;
}

// ---------------------------------------------------------------- 8

Outcome round_trip() {
  Outcome out;
  for (ShapeKind kind : kShapes) {
    PipelineConfig cfg;
    cfg.grid.resolution = kShapeResolution;
    cfg.solver.zeta = 1e-6;
    cfg.round_trip_samples = kRoundTripSamples;
    const PipelineRun run = run_stages(shape_mesh(kind, kRoundTripSubdivision), cfg);
    const RoundTripStats& rt = *run.report.round_trip;
    out.check(rt.failures == 0 && rt.max_error <= kRoundTripLimit,
              std::string(to_string(kind)) + ": " + std::to_string(rt.samples) + " points, " +
                  std::to_string(rt.failures) + " failures, max " + fmt(rt.max_error, 3) + "h, mean " +
                  fmt(rt.mean_error, 3) + "h");
  }
  return out;
}

// ---------------------------------------------------------------- 9

Outcome interpolation_exactness() {
  Outcome out;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), unit(0.0, 1.0);
  std::array<double, 8> c{};
  for (double& v : c) v = coef(rng);
  auto f = [&](const Vec3& p) {
    return c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.z + c[4] * p.x * p.y + c[5] * p.y * p.z + c[6] * p.z * p.x +
           c[7] * p.x * p.y * p.z;
  };
  VoxelGrid g({7, 6, 8}, Vec3(-0.4, 0.3, -1.1), 0.29);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.set_flag(i, NodeFlag::Interior);
    g.set_phi(i, f(g.position(i)));
  }
  const FieldSampler sampler(g);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Vec3 p = g.origin() + Vec3(unit(rng) * (g.nx() - 1), unit(rng) * (g.ny() - 1), unit(rng) * (g.nz() - 1)) *
                                    g.spacing();
    worst = std::max(worst, std::abs(sampler.sample_phi(p) - f(p)) / std::max(1.0, std::abs(f(p))));
  }
  out.check(worst <= kSpanTolerance, "trilinear span: max relative error " + fmt(worst, 3) + " over 1000 points");

  const Solved s = solve_shape(ShapeKind::TwoLobe, 2, 20, 1e-6);
  const FieldSampler field(s.grid);
  const double h = s.grid.spacing();
  const double step = 1e-4 * h;
  double gworst = 0.0;
  int tested = 0;
  while (tested < 1000) {
    const Vec3 local(unit(rng) * (s.grid.nx() - 1), unit(rng) * (s.grid.ny() - 1), unit(rng) * (s.grid.nz() - 1));
    bool near_face = false;
    for (int a = 0; a < 3; ++a) {
      const double frac = local[a] - std::floor(local[a]);
      near_face |= frac < 2e-4 || frac > 1 - 2e-4;
    }
    const Vec3 p = s.grid.origin() + local * h;
    if (near_face || !field.in_domain(p)) continue;
    const Vec3 grad = field.sample_gradient(p);
    if (norm(grad) < 1e-8) continue;
    Vec3 fd;
    for (int a = 0; a < 3; ++a) {
      Vec3 e;
      e[a] = step;
      fd[a] = (field.sample_phi(p + e) - field.sample_phi(p - e)) / (2 * step);
    }
    gworst = std::max(gworst, norm(fd - grad) / norm(grad));
    ++tested;
  }
  out.check(gworst <= kGradientTolerance,
            "analytic gradient vs central differences: max relative gap " + fmt(gworst, 3) + " over 1000 points");
  return out;
}

// ---------------------------------------------------------------- 10

Outcome determinism() {
  Outcome out;
  auto atlas_csv = [] {
    PipelineConfig cfg;
    cfg.grid.resolution = 24;
    cfg.threads = 1;
    const PipelineRun run = run_stages(shape_mesh(ShapeKind::Star5, 2), cfg);
    std::ostringstream csv;
    write_atlas_csv(run.atlas, csv);
    return csv.str();
  };
  const std::string first = atlas_csv();
  const std::string second = atlas_csv();
  out.check(first == second && !first.empty(),
            "two single-threaded star5 runs: " + std::to_string(first.size()) + " bytes, " +
                (first == second ? "identical" : "different"));
  return out;
}

struct Criterion {
  int number;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "maximum principle on every shape", [] { return maximum_principle_and_residual(false); }},
      {2, "stencil residual below zeta", [] { return maximum_principle_and_residual(true); }},
      {3, "iterative solvers match a dense direct solve", solver_oracle},
      {4, "second-order convergence on the spherical shell", analytic_shell},
      {5, "radial streamlines on the sphere", radial_streamlines},
      {6, "bijective atlases and separable star5 lobes", bijectivity},
      {7, "endpoint angles insensitive to termination", termination_insensitivity},
      {8, "interior round trip within 2h", round_trip},
      {9, "trilinear exactness and gradient consistency", interpolation_exactness},
      {10, "deterministic atlas CSV", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.number)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details.push_back(std::string("BAD  exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.number, c.title, seconds_since(t0));
    for (const std::string& d : o.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
