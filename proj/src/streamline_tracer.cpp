#include "harmap/streamline_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "harmap/field_sampler.hpp"
#include "harmap/mesh_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace harmap {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTerminalPhi: return "ReachedTerminalPhi";
    case Termination::ReachedCenterCell: return "ReachedCenterCell";
    case Termination::ReachedTerminalDistance: return "ReachedTerminalDistance";
    case Termination::Stalled: return "Stalled";
    case Termination::StepLimit: return "StepLimit";
  }
  return "Unknown";
}

void TracerConfig::validate() const {
  if (!(eta > 0.0)) throw InvalidParams("eta must be positive");
  if (!(rk_abs_tol > 0.0 && rk_rel_tol > 0.0)) throw InvalidParams("Runge-Kutta tolerances must be positive");
  if (!(h_min > 0.0 && h_min < h_max)) throw InvalidParams("need 0 < h_min < h_max");
  if (!(terminal_phi > 0.0 && terminal_phi < 1.0)) throw InvalidParams("terminal_phi must lie in (0, 1)");
  if (!(terminal_distance >= 0.0)) throw InvalidParams("terminal_distance must be non-negative");
  if (max_steps == 0) throw InvalidParams("max_steps must be positive");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw InvalidParams("max_failure_fraction must lie in [0, 1]");
  }
}

namespace {

constexpr double kStallGradient = 1.0e-12;
constexpr double kFallbackStep = 1.0e-2;  // grid units

// Runge-Kutta-Fehlberg 4(5) tableau.
constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 4, 0, 0, 0, 0},
    {3.0 / 32, 9.0 / 32, 0, 0, 0},
    {1932.0 / 2197, -7200.0 / 2197, 7296.0 / 2197, 0, 0},
    {439.0 / 216, -8.0, 3680.0 / 513, -845.0 / 4104, 0},
    {-8.0 / 27, 2.0, -3544.0 / 2565, 1859.0 / 4104, -11.0 / 40},
};
constexpr double kB5[6] = {16.0 / 135, 0, 6656.0 / 12825, 28561.0 / 56430, -9.0 / 50, 2.0 / 55};
constexpr double kB4[6] = {25.0 / 216, 0, 1408.0 / 2565, 2197.0 / 4104, -1.0 / 5, 0};

class StalledField : public std::exception {};

// Unit descent direction. The path of dX/dt = -eta grad(phi) is traced in
// arc length, which fixes the speed and leaves the geometry unchanged.
Vec3 descent(const FieldSampler& sampler, const Vec3& x) {
  const Vec3 g = sampler.sample_gradient(x);
  const double m = norm(g);
  if (m < kStallGradient) throw StalledField();
  return -g / m;
}

struct RkStep {
  Vec3 next;
  double error_ratio;
};

RkStep rkf45(const FieldSampler& sampler, const Vec3& x, const Vec3& k1, double ds, const TracerConfig& cfg) {
  std::array<Vec3, 6> k;
  k[0] = k1;
  for (int s = 1; s < 6; ++s) {
    Vec3 y = x;
    for (int r = 0; r < s; ++r) y += (ds * kA[s][r]) * k[static_cast<std::size_t>(r)];
    k[static_cast<std::size_t>(s)] = descent(sampler, y);
  }
  Vec3 high = x, low = x;
  for (std::size_t s = 0; s < 6; ++s) {
    high += (ds * kB5[s]) * k[s];
    low += (ds * kB4[s]) * k[s];
  }
  double ratio = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double scale = cfg.rk_abs_tol + cfg.rk_rel_tol * std::max(std::abs(x[a]), std::abs(high[a]));
    ratio = std::max(ratio, std::abs(high[a] - low[a]) / scale);
  }
  return {high, ratio};
}

bool touches_center(const VoxelGrid& grid, const GridIndex& cell) {
  const auto center = grid.center();
  if (!center) return false;
  const GridIndex c = grid.coords(*center);
  return cell.i <= c.i && c.i <= cell.i + 1 && cell.j <= c.j && c.j <= cell.j + 1 && cell.k <= c.k &&
         c.k <= cell.k + 1;
}

struct Nudge {
  Vec3 position;
  double drop;  // estimated potential difference seed -> position
};

constexpr int kMaxNudges = 8;

// Moves a seed whose cell touches the far exterior down the potential in
// quarter-cell steps until its cell is fully defined. Each step estimates
// the slope from cell edges with both ends defined.
Nudge nudge_seed(const VoxelGrid& grid, const FieldSampler& sampler, const Vec3& seed) {
  Nudge nudge{seed, 0.0};
  for (int attempt = 0; attempt < kMaxNudges && !sampler.in_domain(nudge.position); ++attempt) {
    const GridIndex c = sampler.cell_of(nudge.position);
    Vec3 slope;
    int counts[3] = {0, 0, 0};
    for (int n = 0; n < 8; ++n) {
      for (int axis = 0; axis < 3; ++axis) {
        if (n & (1 << axis)) continue;
        const int m = n | (1 << axis);
        const std::size_t a = grid.index(c.i + (n & 1), c.j + ((n >> 1) & 1), c.k + ((n >> 2) & 1));
        const std::size_t b = grid.index(c.i + (m & 1), c.j + ((m >> 1) & 1), c.k + ((m >> 2) & 1));
        if (!grid.is_defined(a) || !grid.is_defined(b)) continue;
        slope[axis] += (grid.phi(b) - grid.phi(a)) / grid.spacing();
        ++counts[axis];
      }
    }
    for (int axis = 0; axis < 3; ++axis) {
      if (counts[axis]) slope[axis] /= counts[axis];
    }
    if (norm(slope) < kStallGradient) break;
    nudge.position -= (0.25 * grid.spacing()) * normalized(slope);
    nudge.drop += 0.25 * grid.spacing() * norm(slope);
  }
  if (!sampler.in_domain(nudge.position)) {
    std::ostringstream os;
    os << "seed " << seed << " has no defined field nearby";
    throw OutOfDomain(os.str());
  }
  return nudge;
}

// Seeds sit between the Boundary nodes (phi = 1) and the guard layers, so
// their potential is usually a little above 1, where the fit's gradient runs
// along the surface rather than into the solid. Steps straight down the
// nodal gradient, doubling the distance, to the first point with phi <= 1.
std::optional<FieldSample> enter_solid(const VoxelGrid& grid, const FieldSampler& sampler, Vec3& x) {
  const FieldSampler nodal(grid, GradientMode::Nodal);
  const Vec3 slope = nodal.sample_gradient(x);
  if (norm(slope) < kStallGradient) return std::nullopt;
  const Vec3 down = -normalized(slope);
  for (double t = grid.spacing() / 16.0; t <= 2.0 * grid.spacing(); t *= 2.0) {
    const Vec3 candidate = x + t * down;
    if (!sampler.in_domain(candidate)) continue;
    const FieldSample s = sampler.sample(candidate);
    if (s.phi <= 1.0) {
      x = candidate;
      return s;
    }
  }
  return std::nullopt;
}

}  // namespace

Streamline trace(const VoxelGrid& grid, const Vec3& seed, const TracerConfig& cfg, std::size_t seed_vertex) {
  cfg.validate();
  const FieldSampler sampler(grid, cfg.gradient);
  // The analytic gradient of the fit always descends the sampled potential;
  // it takes over single steps where the nodal direction does not.
  const FieldSampler fallback(grid, GradientMode::Analytic);
  const double h = grid.spacing();
  const double ds_min = cfg.h_min * h;
  const double ds_max = cfg.h_max * h;
  const double landing = cfg.rk_abs_tol + cfg.rk_rel_tol * cfg.terminal_phi;
  const double landing_floor = 1.0e-8 * grid.spacing();

  Streamline line;
  line.seed_vertex = seed_vertex;
  Vec3 x = seed;
  FieldSample here;
  line.points.push_back(seed);
  if (sampler.in_domain(x)) {
    here = sampler.sample(x);
    line.phis.push_back(here.phi);
  } else {
    // Raises OutOfDomain for seeds off the lattice or deep outside.
    const Nudge nudge = nudge_seed(grid, sampler, x);
    x = nudge.position;
    here = sampler.sample(x);
    line.phis.push_back(here.phi + nudge.drop);
    line.points.push_back(x);
    line.phis.push_back(here.phi);
  }
  if (here.phi > 1.0) {
    if (const auto entry = enter_solid(grid, sampler, x)) {
      here = *entry;
      line.points.push_back(x);
      line.phis.push_back(here.phi);
    }
  }

  // Inside the cells around the sink the field degenerates; running out of
  // room there counts as arrival rather than failure.
  auto fail = [&](ErrorKind kind, Termination t, const std::string& why) -> Streamline {
    if (touches_center(grid, sampler.cell_of(x))) {
      line.termination = Termination::ReachedCenterCell;
      return std::move(line);
    }
    line.termination = t;
    std::ostringstream os;
    os << why << " at " << line.points.back() << " (phi " << line.phis.back() << ")";
    throw TraceError(kind, os.str(), std::move(line));
  };

  double ds = std::min(0.5 * h, ds_max);
  double previous_error = 1.0;
  std::size_t steps = 0;
  bool analytic_step = false;
  while (true) {
    if (here.phi <= cfg.terminal_phi) {
      line.termination = Termination::ReachedTerminalPhi;
      return line;
    }
    if (cfg.terminal_distance > 0.0 && grid.center() &&
        distance(x, grid.position(*grid.center())) <= cfg.terminal_distance) {
      line.termination = Termination::ReachedTerminalDistance;
      return line;
    }
    if (steps >= cfg.max_steps) return fail(ErrorKind::StepLimit, Termination::StepLimit, "step limit reached");
    const FieldSampler& field = analytic_step ? fallback : sampler;
    const Vec3 gradient = analytic_step ? fallback.sample_gradient(x) : here.gradient;
    if (norm(gradient) < kStallGradient) return fail(ErrorKind::Stalled, Termination::Stalled, "vanishing gradient");
    ++steps;

    const Vec3 k1 = -gradient / norm(gradient);
    RkStep step;
    FieldSample next;
    try {
      step = rkf45(field, x, k1, ds, cfg);
      next = sampler.sample(step.next);
    } catch (const OutOfDomain&) {
      step.error_ratio = 1.0e10;  // left the defined field: treat as a rejected step
    } catch (const StalledField&) {
      step.error_ratio = 1.0e10;
    }

    if (step.error_ratio <= 1.0 && !(next.phi < here.phi) && !analytic_step && ds < kFallbackStep * h) {
      analytic_step = true;
      continue;
    }
    const bool descends = step.error_ratio < 1.0e10 && next.phi < here.phi;
    // The analytic gradient jumps across cell faces, so near the sink the
    // error estimate of a face-crossing step stays above tolerance however
    // small the step. A descending step at the smallest size is taken anyway.
    const bool forced = descends && ds <= ds_min * (1.0 + 1e-9);
    if ((step.error_ratio > 1.0 || !descends) && !forced) {
      const double shrink = step.error_ratio > 1.0 && step.error_ratio < 1.0e10
                                ? std::clamp(0.9 * std::pow(step.error_ratio, -0.25), 0.1, 0.5)
                                : 0.5;
      if (ds <= ds_min * (1.0 + 1e-9)) {
        return fail(ErrorKind::Stalled, Termination::Stalled, "step size fell below h_min");
      }
      ds = std::max(ds * shrink, ds_min);
      continue;
    }
    if (next.phi < cfg.terminal_phi - landing && ds > landing_floor) {
      // Shorten the step to land in [terminal_phi - landing, terminal_phi].
      // Landing steps may go below ds_min because the gradient near the sink
      // is steep enough that one ds_min step overshoots the tolerance.
      const double fraction = (here.phi - cfg.terminal_phi) / (here.phi - next.phi);
      ds = std::max(landing_floor, ds * std::clamp(fraction, 0.05, 0.999));
      continue;
    }

    line.pseudo_time += 0.5 * ds * (1.0 / norm(here.gradient) + 1.0 / std::max(norm(next.gradient), kStallGradient)) / cfg.eta;
    x = step.next;
    here = next;
    analytic_step = false;
    line.points.push_back(x);
    line.phis.push_back(here.phi);

    const double err = std::max(step.error_ratio, 1.0e-10);
    const double factor = std::clamp(0.9 * std::pow(err, -0.7 / 5.0) * std::pow(previous_error, 0.4 / 5.0), 0.2, 5.0);
    previous_error = err;
    ds = std::clamp(ds * factor, ds_min, ds_max);
  }
}

TraceBatch trace_all(const VoxelGrid& grid, const std::vector<Vec3>& seeds, const TracerConfig& cfg) {
  cfg.validate();
  TraceBatch batch;
  batch.lines.resize(seeds.size());
  std::vector<std::optional<SeedFailure>> failures(seeds.size());
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(seeds.size());
#ifdef _OPENMP
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#endif
#pragma omp parallel for num_threads(threads) schedule(dynamic, 4)
  for (std::ptrdiff_t n = 0; n < count; ++n) {
    const std::size_t s = static_cast<std::size_t>(n);
    try {
      batch.lines[s] = trace(grid, seeds[s], cfg, s);
    } catch (const TraceError& e) {
      failures[s] = SeedFailure{s, e.kind(), e.what(), e.last_position()};
    } catch (const Error& e) {
      failures[s] = SeedFailure{s, e.kind(), e.what(), seeds[s]};
    }
  }
  batch.report.seeds = seeds.size();
  for (auto& f : failures) {
    if (f) batch.report.failures.push_back(std::move(*f));
  }
  if (batch.report.failure_fraction() > cfg.max_failure_fraction) {
    std::ostringstream os;
    os << batch.report.failures.size() << " of " << seeds.size() << " streamlines failed";
    if (!batch.report.failures.empty()) os << " (first: " << batch.report.failures.front().message << ")";
    throw BatchFailed(os.str(), batch.report);
  }
  return batch;
}

TraceBatch trace_all(const VoxelGrid& grid, const SurfaceMesh& mesh, const TracerConfig& cfg) {
  return trace_all(grid, mesh.vertices(), cfg);
}

}  // namespace harmap
