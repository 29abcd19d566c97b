#include "harmap/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

#include "harmap/error.hpp"

namespace harmap {

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "box") return ShapeKind::Box;
  if (name == "two_lobe") return ShapeKind::TwoLobe;
  if (name == "star5") return ShapeKind::Star5;
  if (name == "lshape") return ShapeKind::LShape;
  throw InvalidParams("unknown shape '" + name + "' (sphere, box, two_lobe, star5, lshape)");
}

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Box: return "box";
    case ShapeKind::TwoLobe: return "two_lobe";
    case ShapeKind::Star5: return "star5";
    case ShapeKind::LShape: return "lshape";
  }
  return "unknown";
}

void ShapeParams::validate(ShapeKind kind) const {
  if (subdivision < 0 || subdivision > 7) throw InvalidParams("subdivision must lie in [0, 7]");
  switch (kind) {
    case ShapeKind::Sphere:
      if (!(radius > 0.0)) throw InvalidParams("radius must be positive");
      break;
    case ShapeKind::Box:
      if (!(half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0)) {
        throw InvalidParams("box half extents must be positive");
      }
      break;
    case ShapeKind::Star5:
      if (!(radius > 0.0 && lobe_ratio >= 1.0 && lobe_sharpness > 0.0 && flatten > 0.0)) {
        throw InvalidParams("star5 needs radius > 0, lobe_ratio >= 1, sharpness > 0, flatten > 0");
      }
      break;
    case ShapeKind::TwoLobe:
      if (!(radius_a > 0.0 && radius_b > 0.0 && separation > 0.0)) {
        throw InvalidParams("two_lobe radii and separation must be positive");
      }
      if (!(separation < radius_a + radius_b) || separation + std::min(radius_a, radius_b) <= std::max(radius_a, radius_b)) {
        throw InvalidParams("two_lobe spheres must overlap without one containing the other");
      }
      break;
    case ShapeKind::LShape:
      if (!(thin_limb > 0.0 && thick_limb > thin_limb && limb_length > thick_limb)) {
        throw InvalidParams("lshape needs 0 < thin_limb < thick_limb < limb_length");
      }
      break;
  }
}

SurfaceMesh icosphere(int level) {
  const double t = std::numbers::phi;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p = normalized(p);
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back(normalized(v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]));
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const Triangle& tri : f) {
      const int a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  return SurfaceMesh(std::move(v), std::move(f));
}

namespace {

// Distance from an interior point to the exit of a box along a unit ray.
double box_exit(const Vec3& origin, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) t = std::min(t, (hi[a] - origin[a]) / dir[a]);
    else if (dir[a] < 0.0) t = std::min(t, (lo[a] - origin[a]) / dir[a]);
  }
  return t;
}

double ball_exit(const Vec3& origin, const Vec3& dir, const Vec3& center, double r) {
  const Vec3 oc = origin - center;
  const double b = dot(oc, dir);
  const double c = dot(oc, oc) - r * r;
  return -b + std::sqrt(b * b - c);
}

SurfaceMesh radial_graph(int level, const Vec3& origin, const std::function<double(const Vec3&)>& exit,
                         double z_scale = 1.0) {
  const SurfaceMesh base = icosphere(level);
  std::vector<Vec3> v;
  v.reserve(base.vertex_count());
  for (const Vec3& d : base.vertices()) {
    Vec3 p = exit(d) * d;
    p.z *= z_scale;
    v.push_back(origin + p);
  }
  return SurfaceMesh(std::move(v), base.triangles());
}

}  // namespace

SurfaceMesh generate_shape(ShapeKind kind, const ShapeParams& p) {
  p.validate(kind);
  const Vec3 zero;
  switch (kind) {
    case ShapeKind::Sphere:
      return radial_graph(p.subdivision, zero, [&](const Vec3&) { return p.radius; });
    case ShapeKind::Box:
      return radial_graph(p.subdivision, zero,
                          [&](const Vec3& d) { return box_exit(zero, d, -p.half_extents, p.half_extents); });
    case ShapeKind::Star5:
      return radial_graph(
          p.subdivision, zero,
          [&](const Vec3& d) {
            const double psi = std::atan2(d.y, d.x);
            const double sin2 = d.x * d.x + d.y * d.y;
            const double lobe = std::pow(0.5 * (1.0 + std::cos(5.0 * psi)), p.lobe_sharpness);
            return p.radius * (1.0 + (p.lobe_ratio - 1.0) * lobe * sin2);
          },
          p.flatten);
    case ShapeKind::TwoLobe: {
      const Vec3 ca(-0.5 * p.separation, 0, 0), cb(0.5 * p.separation, 0, 0);
      // A point on the axis inside both balls; the union is star-shaped from it.
      const double lo = std::max(ca.x - p.radius_a, cb.x - p.radius_b);
      const double hi = std::min(ca.x + p.radius_a, cb.x + p.radius_b);
      const Vec3 origin(0.5 * (lo + hi), 0, 0);
      return radial_graph(p.subdivision, origin, [&, origin](const Vec3& d) {
        return std::max(ball_exit(origin, d, ca, p.radius_a), ball_exit(origin, d, cb, p.radius_b));
      });
    }
    case ShapeKind::LShape: {
      const Vec3 thick_hi(p.limb_length, p.thick_limb, p.thick_limb);
      const Vec3 thin_hi(p.thin_limb, p.limb_length, p.thin_limb);
      const Vec3 origin(0.5 * p.thin_limb, 0.5 * p.thin_limb, 0.5 * p.thin_limb);
      return radial_graph(p.subdivision, origin, [&, origin](const Vec3& d) {
        return std::max(box_exit(origin, d, zero, thick_hi), box_exit(origin, d, zero, thin_hi));
      });
    }
  }
  throw InvalidParams("unhandled shape kind");
}

}  // namespace harmap
