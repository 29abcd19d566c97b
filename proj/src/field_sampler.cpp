#include "harmap/field_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harmap/error.hpp"

namespace harmap {

namespace {

// Corner values c[a + 2b + 4c] for corner offset (a, b, c).
std::array<double, 8> corner_values(const VoxelGrid& grid, const GridIndex& cell) {
  std::array<double, 8> c{};
  for (int n = 0; n < 8; ++n) {
    const std::size_t idx = grid.index(cell.i + (n & 1), cell.j + ((n >> 1) & 1), cell.k + ((n >> 2) & 1));
    if (!grid.is_defined(idx)) {
      std::ostringstream os;
      os << "cell (" << cell.i << ", " << cell.j << ", " << cell.k << ") touches far-exterior node " << idx;
      throw UndefinedCorner(os.str());
    }
    c[static_cast<std::size_t>(n)] = grid.phi(idx);
  }
  return c;
}

// Local-coordinate coefficients of
//   a0 + a1 u + a2 v + a3 w + a4 uv + a5 vw + a6 wu + a7 uvw.
std::array<double, 8> local_coefficients(const std::array<double, 8>& c) {
  return {c[0],
          c[1] - c[0],
          c[2] - c[0],
          c[4] - c[0],
          c[3] - c[1] - c[2] + c[0],
          c[6] - c[2] - c[4] + c[0],
          c[5] - c[1] - c[4] + c[0],
          c[7] - c[3] - c[5] - c[6] + c[1] + c[2] + c[4] - c[0]};
}

bool cell_on_grid(const VoxelGrid& grid, const GridIndex& g) {
  return g.i >= 0 && g.j >= 0 && g.k >= 0 && g.i < grid.nx() - 1 && g.j < grid.ny() - 1 && g.k < grid.nz() - 1;
}

}  // namespace

double TrilinearCell::value(const Vec3& q) const {
  return p[0] * q.x * q.y * q.z + p[1] * q.x * q.y + p[2] * q.y * q.z + p[3] * q.z * q.x + p[4] * q.x +
         p[5] * q.y + p[6] * q.z + p[7];
}

Vec3 TrilinearCell::gradient(const Vec3& q) const {
  return {p[0] * q.y * q.z + p[1] * q.y + p[3] * q.z + p[4],
          p[0] * q.x * q.z + p[1] * q.x + p[2] * q.z + p[5],
          p[0] * q.x * q.y + p[2] * q.y + p[3] * q.x + p[6]};
}

TrilinearCell fit_cell(const VoxelGrid& grid, const GridIndex& cell) {
  if (!cell_on_grid(grid, cell)) throw OutOfDomain("cell index outside the grid");
  const auto a = local_coefficients(corner_values(grid, cell));

  // Substitute u = (x - x0)/h etc. and collect world-coordinate monomials.
  const double h = grid.spacing();
  const Vec3 o = grid.position(cell.i, cell.j, cell.k);
  const double s1 = 1.0 / h, s2 = s1 * s1, s3 = s2 * s1;
  const double x0 = o.x, y0 = o.y, z0 = o.z;
  TrilinearCell fit;
  fit.cell = cell;
  fit.p[0] = a[7] * s3;                                  // xyz
  fit.p[1] = a[4] * s2 - a[7] * z0 * s3;                 // xy
  fit.p[2] = a[5] * s2 - a[7] * x0 * s3;                 // yz
  fit.p[3] = a[6] * s2 - a[7] * y0 * s3;                 // zx
  fit.p[4] = a[1] * s1 - a[4] * y0 * s2 - a[6] * z0 * s2 + a[7] * y0 * z0 * s3;  // x
  fit.p[5] = a[2] * s1 - a[4] * x0 * s2 - a[5] * z0 * s2 + a[7] * x0 * z0 * s3;  // y
  fit.p[6] = a[3] * s1 - a[5] * y0 * s2 - a[6] * x0 * s2 + a[7] * x0 * y0 * s3;  // z
  fit.p[7] = a[0] - a[1] * x0 * s1 - a[2] * y0 * s1 - a[3] * z0 * s1 + a[4] * x0 * y0 * s2 +
             a[5] * y0 * z0 * s2 + a[6] * z0 * x0 * s2 - a[7] * x0 * y0 * z0 * s3;
  return fit;
}

GridIndex FieldSampler::cell_of(const Vec3& point) const {
  const VoxelGrid& g = *grid_;
  const Vec3 rel = (point - g.origin()) / g.spacing();
  GridIndex cell;
  int* out[3] = {&cell.i, &cell.j, &cell.k};
  for (int a = 0; a < 3; ++a) {
    const double r = rel[a];
    const int last = g.dims()[static_cast<std::size_t>(a)] - 1;
    // Lattice positions of the outer nodes can round a few ulps past the face.
    constexpr double slack = 1e-9;
    if (!(r >= -slack && r <= last + slack)) {
      std::ostringstream os;
      os << "point " << point << " lies outside the grid";
      throw OutOfDomain(os.str());
    }
    *out[a] = std::clamp(static_cast<int>(std::floor(r)), 0, last - 1);
  }
  return cell;
}

bool FieldSampler::in_domain(const Vec3& point) const {
  try {
    const GridIndex c = cell_of(point);
    for (int n = 0; n < 8; ++n) {
      if (!grid_->is_defined(grid_->index(c.i + (n & 1), c.j + ((n >> 1) & 1), c.k + ((n >> 2) & 1)))) {
        return false;
      }
    }
    return true;
  } catch (const OutOfDomain&) {
    return false;
  }
}

FieldSample FieldSampler::sample(const Vec3& point) const {
  const GridIndex cell = cell_of(point);
  std::array<double, 8> c;
  try {
    c = corner_values(*grid_, cell);
  } catch (const UndefinedCorner& e) {
    throw OutOfDomain(e.what());
  }
  const auto a = local_coefficients(c);
  const double h = grid_->spacing();
  const Vec3 o = grid_->position(cell.i, cell.j, cell.k);
  const double u = (point.x - o.x) / h, v = (point.y - o.y) / h, w = (point.z - o.z) / h;

  FieldSample s;
  s.phi = a[0] + a[1] * u + a[2] * v + a[3] * w + a[4] * u * v + a[5] * v * w + a[6] * w * u + a[7] * u * v * w;
  bool blend = mode_ == GradientMode::Nodal;
  for (int n = 0; n < 8 && blend; ++n) {
    const std::size_t idx = grid_->index(cell.i + (n & 1), cell.j + ((n >> 1) & 1), cell.k + ((n >> 2) & 1));
    blend = grid_->flag(idx) != NodeFlag::Center;
  }
  if (!blend) {
    s.gradient = Vec3(a[1] + a[4] * v + a[6] * w + a[7] * v * w, a[2] + a[4] * u + a[5] * w + a[7] * u * w,
                      a[3] + a[5] * v + a[6] * u + a[7] * u * v) /
                 h;
    return s;
  }
  for (int n = 0; n < 8; ++n) {
    const double weight = ((n & 1) ? u : 1.0 - u) * ((n & 2) ? v : 1.0 - v) * ((n & 4) ? w : 1.0 - w);
    const std::size_t idx = grid_->index(cell.i + (n & 1), cell.j + ((n >> 1) & 1), cell.k + ((n >> 2) & 1));
    s.gradient += weight * node_gradient(idx);
  }
  return s;
}

Vec3 FieldSampler::node_gradient(std::size_t idx) const {
  const VoxelGrid& g = *grid_;
  const GridIndex c = g.coords(idx);
  const int at[3] = {c.i, c.j, c.k};
  // Solid nodes difference only across solid neighbours and guard nodes only
  // across guard or boundary neighbours, so no difference straddles the
  // surface.
  const bool outside = g.flag(idx) == NodeFlag::Exterior;
  auto usable = [&](std::size_t n) {
    return outside ? g.is_defined(n) && g.flag(n) != NodeFlag::Interior : g.flag(n) != NodeFlag::Exterior;
  };
  Vec3 grad;
  for (int axis = 0; axis < 3; ++axis) {
    int lo[3] = {c.i, c.j, c.k};
    int hi[3] = {c.i, c.j, c.k};
    --lo[axis];
    ++hi[axis];
    const int last = g.dims()[static_cast<std::size_t>(axis)] - 1;
    const bool has_lo = at[axis] > 0 && usable(g.index(lo[0], lo[1], lo[2]));
    const bool has_hi = at[axis] < last && usable(g.index(hi[0], hi[1], hi[2]));
    const double here = g.phi(idx);
    if (has_lo && has_hi) {
      grad[axis] = (g.phi(g.index(hi[0], hi[1], hi[2])) - g.phi(g.index(lo[0], lo[1], lo[2]))) / (2.0 * g.spacing());
    } else if (has_hi) {
      grad[axis] = (g.phi(g.index(hi[0], hi[1], hi[2])) - here) / g.spacing();
    } else if (has_lo) {
      grad[axis] = (here - g.phi(g.index(lo[0], lo[1], lo[2]))) / g.spacing();
    }
  }
  return grad;
}

double FieldSampler::sample_phi(const Vec3& point) const { return sample(point).phi; }

Vec3 FieldSampler::sample_gradient(const Vec3& point) const { return sample(point).gradient; }

}  // namespace harmap
