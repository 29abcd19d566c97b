#include "harmap/laplace_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace harmap {

std::vector<std::string> SolverConfig::validate() const {
  if (!(zeta > 0.0 && zeta < 1.0)) throw InvalidParams("zeta must lie in (0, 1)");
  if (max_iterations == 0) throw InvalidParams("max_iterations must be positive");
  if (scheme == SolverScheme::Sor && !(omega > 0.0 && omega < 2.0)) {
    throw InvalidParams("SOR omega must lie in (0, 2)");
  }
  std::vector<std::string> warnings;
  if (zeta > 1.0e-3 || zeta < 1.0e-6) {
    warnings.push_back("zeta " + std::to_string(zeta) + " is outside the usual range [1e-6, 1e-3]");
  }
  return warnings;
}

SolverConfig parse_scheme(const std::string& text, SolverConfig base) {
  if (text == "jacobi") {
    base.scheme = SolverScheme::Jacobi;
  } else if (text == "gauss-seidel" || text == "gs") {
    base.scheme = SolverScheme::GaussSeidel;
  } else if (text.rfind("sor", 0) == 0) {
    base.scheme = SolverScheme::Sor;
    if (text.size() > 3) {
      if (text[3] != ':') throw InvalidParams("expected sor:<omega>, got '" + text + "'");
      char* end = nullptr;
      const std::string num = text.substr(4);
      base.omega = std::strtod(num.c_str(), &end);
      if (num.empty() || *end != '\0') throw InvalidParams("bad SOR omega in '" + text + "'");
    }
  } else {
    throw InvalidParams("unknown scheme '" + text + "' (jacobi, gauss-seidel, sor:<omega>)");
  }
  return base;
}

std::string scheme_name(const SolverConfig& cfg) {
  switch (cfg.scheme) {
    case SolverScheme::Jacobi: return "jacobi";
    case SolverScheme::GaussSeidel: return "gauss-seidel";
    case SolverScheme::Sor: return "sor:" + std::to_string(cfg.omega);
  }
  return "unknown";
}

namespace {

int thread_count(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

struct Stencil {
  std::array<std::ptrdiff_t, 6> offsets;

  double mean(const double* phi, std::size_t idx) const {
    const double* p = phi + idx;
    return (p[offsets[0]] + p[offsets[1]] + p[offsets[2]] + p[offsets[3]] + p[offsets[4]] + p[offsets[5]]) /
           6.0;
  }
};

// In-place relaxation over one colour class; returns the largest change.
double relax_in_place(double* phi, const std::vector<std::size_t>& nodes, const Stencil& st, double omega,
                      int threads) {
  double worst = 0.0;
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(nodes.size());
#pragma omp parallel for num_threads(threads) reduction(max : worst) schedule(static)
  for (std::ptrdiff_t n = 0; n < count; ++n) {
    const std::size_t idx = nodes[static_cast<std::size_t>(n)];
    const double delta = omega * (st.mean(phi, idx) - phi[idx]);
    phi[idx] += delta;
    worst = std::max(worst, std::abs(delta));
  }
  return worst;
}

double jacobi_sweep(const double* src, double* dst, const std::vector<std::size_t>& nodes, const Stencil& st,
                    int threads) {
  double worst = 0.0;
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(nodes.size());
#pragma omp parallel for num_threads(threads) reduction(max : worst) schedule(static)
  for (std::ptrdiff_t n = 0; n < count; ++n) {
    const std::size_t idx = nodes[static_cast<std::size_t>(n)];
    dst[idx] = st.mean(src, idx);
    worst = std::max(worst, std::abs(dst[idx] - src[idx]));
  }
  return worst;
}

}  // namespace

SolveReport solve(VoxelGrid& grid, const SolverConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> red, black;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    if (grid.flag(idx) != NodeFlag::Interior) continue;
    const GridIndex g = grid.coords(idx);
    if (g.i == 0 || g.j == 0 || g.k == 0 || g.i == grid.nx() - 1 || g.j == grid.ny() - 1 || g.k == grid.nz() - 1) {
      throw InvalidParams("interior node on the grid shell has no complete stencil");
    }
    ((g.i + g.j + g.k) % 2 == 0 ? red : black).push_back(idx);
  }
  if (red.empty() && black.empty()) throw NoInterior("nothing to solve: grid has no interior nodes");

  const Stencil stencil{grid.neighbor_offsets()};
  const int threads = thread_count(cfg.threads);
  SolveReport report;
  std::span<double> phi = grid.phi_mut();

  std::vector<std::size_t> all;
  std::vector<double> buffer;
  if (cfg.scheme == SolverScheme::Jacobi) {
    all = red;
    all.insert(all.end(), black.begin(), black.end());
    std::sort(all.begin(), all.end());
    buffer.assign(phi.begin(), phi.end());
  }
  const double omega = cfg.scheme == SolverScheme::Sor ? cfg.omega : 1.0;

  while (report.iterations < cfg.max_iterations) {
    double residual = 0.0;
    if (cfg.scheme == SolverScheme::Jacobi) {
      residual = jacobi_sweep(phi.data(), buffer.data(), all, stencil, threads);
      for (std::size_t idx : all) phi[idx] = buffer[idx];
    } else {
      residual = relax_in_place(phi.data(), red, stencil, omega, threads);
      residual = std::max(residual, relax_in_place(phi.data(), black, stencil, omega, threads));
    }
    ++report.iterations;
    report.final_residual = residual;
    if (cfg.record_history) report.history.push_back(residual);
    if (residual < cfg.zeta) {
      report.converged = true;
      return report;
    }
  }
  throw NotConverged("no convergence after " + std::to_string(report.iterations) +
                         " iterations (residual " + std::to_string(report.final_residual) + ")",
                     grid, report);
}

double stencil_residual(const VoxelGrid& grid) {
  const Stencil stencil{grid.neighbor_offsets()};
  const double* phi = grid.phi().data();
  double worst = 0.0;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    if (grid.flag(idx) != NodeFlag::Interior) continue;
    worst = std::max(worst, std::abs(stencil.mean(phi, idx) - phi[idx]));
  }
  return worst;
}

}  // namespace harmap
