#include "harmap/spherical_mapper.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "harmap/error.hpp"
#include "harmap/field_sampler.hpp"

namespace harmap {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_number(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

SphericalAngles cartesian_to_angles(const Vec3& v) {
  if (norm(v) < 1.0e-12) throw DegenerateEndpoint("direction vector vanishes; angles are undefined");
  SphericalAngles a;
  a.theta = std::atan2(std::hypot(v.x, v.y), v.z);
  a.psi = std::atan2(v.y, v.x);
  if (a.psi <= -kPi) a.psi = kPi;
  if (a.psi == 0.0) a.psi = 0.0;  // drop the sign of -0
  return a;
}

SphericalAngles endpoint_angles(const Streamline& line, const Vec3& center) {
  if (line.points.empty()) throw DegenerateEndpoint("streamline has no points");
  return cartesian_to_angles(line.points.back() - center);
}

Vec3 to_sphere(const SphericalAngles& a) {
  const double s = std::sin(a.theta);
  return {s * std::cos(a.psi), s * std::sin(a.psi), std::cos(a.theta)};
}

Vec3 to_sphere(const ParamTriple& t) { return to_sphere(SphericalAngles{t.theta, t.psi}); }

double angular_distance(const SphericalAngles& a, const SphericalAngles& b) {
  return angle_between(to_sphere(a), to_sphere(b));
}

AtlasDiagnostics atlas_diagnostics(const SurfaceMesh& mesh,
                                   const std::vector<std::optional<SphericalAngles>>& angles) {
  AtlasDiagnostics d;
  std::vector<std::size_t> mapped;
  std::vector<Vec3> dirs(angles.size());
  for (std::size_t v = 0; v < angles.size(); ++v) {
    if (angles[v]) {
      mapped.push_back(v);
      dirs[v] = to_sphere(*angles[v]);
    } else {
      d.failed_seeds.push_back(v);
    }
  }

  for (std::size_t a = 0; a < mapped.size(); ++a) {
    for (std::size_t b = a + 1; b < mapped.size(); ++b) {
      const double sep = angle_between(dirs[mapped[a]], dirs[mapped[b]]);
      if (sep < d.min_separation) {
        d.min_separation = sep;
        d.closest_a = mapped[a];
        d.closest_b = mapped[b];
      }
    }
  }

  std::size_t positive = 0, negative = 0, flat = 0;
  for (const Triangle& t : mesh.triangles()) {
    const auto ia = static_cast<std::size_t>(t[0]), ib = static_cast<std::size_t>(t[1]),
               ic = static_cast<std::size_t>(t[2]);
    if (ia >= angles.size() || ib >= angles.size() || ic >= angles.size()) continue;
    if (!angles[ia] || !angles[ib] || !angles[ic]) continue;
    const double volume = dot(dirs[ia], cross(dirs[ib], dirs[ic]));
    if (volume > 0.0) ++positive;
    else if (volume < 0.0) ++negative;
    else ++flat;
  }
  d.checked_triangles = positive + negative + flat;
  d.flipped_triangles = std::min(positive, negative) + flat;
  return d;
}

Atlas build_atlas(const SurfaceMesh& mesh, const std::vector<std::optional<Streamline>>& lines,
                  const Vec3& center, double max_failure_fraction) {
  if (lines.size() != mesh.vertex_count()) {
    throw InvalidParams("build_atlas needs exactly one streamline slot per mesh vertex");
  }
  std::vector<std::optional<SphericalAngles>> angles(lines.size());
  Atlas atlas;
  for (std::size_t v = 0; v < lines.size(); ++v) {
    if (!lines[v]) continue;
    try {
      angles[v] = endpoint_angles(*lines[v], center);
    } catch (const DegenerateEndpoint&) {
      continue;
    }
    atlas.entries.push_back({v, {1.0, angles[v]->theta, angles[v]->psi}});
  }
  atlas.diagnostics = atlas_diagnostics(mesh, angles);
  const double failed = static_cast<double>(atlas.diagnostics.failed_seeds.size()) /
                        static_cast<double>(std::max<std::size_t>(lines.size(), 1));
  if (failed > max_failure_fraction) {
    throw TooManyFailures(std::to_string(atlas.diagnostics.failed_seeds.size()) + " of " +
                          std::to_string(lines.size()) + " vertices could not be mapped");
  }
  return atlas;
}

void write_atlas_csv(const Atlas& atlas, std::ostream& out) {
  out << "vertex_id,theta,psi,phi\n";
  for (const AtlasEntry& e : atlas.entries) {
    out << e.vertex << ',' << format_number(e.param.theta) << ',' << format_number(e.param.psi) << ','
        << format_number(e.param.phi) << '\n';
  }
}

std::vector<AtlasEntry> read_atlas_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("vertex_id,theta,psi,phi", 0) != 0) {
    throw ParseError("atlas CSV must start with the header vertex_id,theta,psi,phi");
  }
  std::vector<AtlasEntry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string field[4];
    for (auto& f : field) std::getline(ls, f, ',');
    try {
      AtlasEntry e;
      e.vertex = static_cast<std::size_t>(std::stoull(field[0]));
      e.param.theta = std::stod(field[1]);
      e.param.psi = std::stod(field[2]);
      e.param.phi = std::stod(field[3]);
      entries.push_back(e);
    } catch (const std::exception&) {
      throw ParseError("atlas CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return entries;
}

void write_atlas_svg(const std::vector<AtlasEntry>& entries, std::ostream& out) {
  constexpr double kWidth = 720, kHeight = 720, kMargin = 60;
  const double sx = (kWidth - 2 * kMargin) / kPi;
  const double sy = (kHeight - 2 * kMargin) / (2 * kPi);
  auto px = [&](double theta) { return kMargin + theta * sx; };
  auto py = [&](double psi) { return kHeight - kMargin - (psi + kPi) * sy; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  const char* theta_labels[] = {"0", "&#960;/2", "&#960;"};
  for (int t = 0; t <= 2; ++t) {
    out << "<text x=\"" << px(t * kPi / 2) << "\" y=\"" << kHeight - kMargin + 20
        << "\" font-size=\"14\" text-anchor=\"middle\">" << theta_labels[t] << "</text>\n";
  }
  const char* psi_labels[] = {"-&#960;", "0", "&#960;"};
  for (int t = 0; t <= 2; ++t) {
    out << "<text x=\"" << kMargin - 10 << "\" y=\"" << py(-kPi + t * kPi) + 5
        << "\" font-size=\"14\" text-anchor=\"end\">" << psi_labels[t] << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
      << "\" font-size=\"16\" text-anchor=\"middle\">&#952; (polar)</text>\n";
  out << "<text x=\"20\" y=\"" << kHeight / 2 << "\" font-size=\"16\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kHeight / 2 << ")\">&#968; (azimuth)</text>\n";
  out << "<g fill=\"#1f4e9c\">\n";
  for (const AtlasEntry& e : entries) {
    out << "<circle cx=\"" << format_number(px(e.param.theta)) << "\" cy=\"" << format_number(py(e.param.psi))
        << "\" r=\"1.8\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

void write_sphere_off(const SurfaceMesh& mesh, const Atlas& atlas, const Vec3& center, std::ostream& out) {
  std::vector<Vec3> image(mesh.vertex_count());
  std::vector<char> mapped(mesh.vertex_count(), 0);
  for (const AtlasEntry& e : atlas.entries) {
    image[e.vertex] = to_sphere(e.param);
    mapped[e.vertex] = 1;
  }
  for (std::size_t v = 0; v < image.size(); ++v) {
    if (!mapped[v]) image[v] = normalized(mesh.vertices()[v] - center);
  }
  write_off(image, mesh.triangles(), out);
}

void MapperConfig::validate() const {
  if (k < 1) throw InvalidParams("k must be at least 1");
  if (!(sample_spacing > 0.0)) throw InvalidParams("sample_spacing must be positive");
  if (!(max_angle > 0.0)) throw InvalidParams("max_angle must be positive");
}

ParamTable::ParamTable(const VoxelGrid& grid, const std::vector<std::optional<Streamline>>& lines,
                       MapperConfig cfg)
    : grid_(&grid), cfg_(cfg) {
  cfg_.validate();
  const auto center = grid.center();
  if (!center) throw InvalidParams("grid has no center node");
  center_ = grid.position(*center);
  const double spacing = cfg_.sample_spacing * grid.spacing();

  for (const auto& line : lines) {
    if (!line || line->points.empty()) continue;
    SphericalAngles angles;
    try {
      angles = endpoint_angles(*line, center_);
    } catch (const DegenerateEndpoint&) {
      continue;
    }
    const Vec3 dir = to_sphere(angles);
    auto add = [&](const Vec3& p, double phi) {
      records_.push_back({p, {phi, angles.theta, angles.psi}, dir});
    };
    const std::size_t begin = records_.size();
    add(line->points.front(), line->phis.front());
    for (std::size_t s = 1; s < line->points.size(); ++s) {
      const Vec3& a = line->points[s - 1];
      const Vec3& b = line->points[s];
      const int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / spacing)));
      for (int p = 1; p <= pieces; ++p) {
        const double t = static_cast<double>(p) / pieces;
        add(a + t * (b - a), line->phis[s - 1] + t * (line->phis[s] - line->phis[s - 1]));
      }
    }
    lines_.push_back({begin, records_.size()});
  }
  if (records_.empty()) throw InvalidParams("no streamline samples to build the parameter table from");
}

namespace {

// Indices of the k smallest keys, ascending.
std::vector<std::size_t> k_smallest(const std::vector<double>& keys, std::size_t k) {
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  k = std::min(k, order.size());
  auto by_key = [&](std::size_t a, std::size_t b) { return keys[a] < keys[b] || (keys[a] == keys[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_key);
  order.resize(k);
  return order;
}

constexpr int kRayBisections = 60;

}  // namespace

ParamTriple ParamTable::parameterize_point(const Vec3& point) const {
  const FieldSampler sampler(*grid_);
  ParamTriple t;
  t.phi = sampler.sample_phi(point);
  if (distance(point, center_) < 1.0e-9 * grid_->spacing()) {
    throw DegenerateEndpoint("the shape center has phi = 0 and no defined angles");
  }
  std::vector<double> d2(records_.size());
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const Vec3 diff = records_[r].position - point;
    d2[r] = dot(diff, diff);
  }
  const auto nearest = k_smallest(d2, static_cast<std::size_t>(cfg_.k));
  if (d2[nearest.front()] == 0.0) {
    t.theta = records_[nearest.front()].param.theta;
    t.psi = records_[nearest.front()].param.psi;
    return t;
  }
  Vec3 sum;
  for (std::size_t r : nearest) sum += records_[r].direction / std::sqrt(d2[r]);
  const SphericalAngles a = cartesian_to_angles(sum);
  t.theta = a.theta;
  t.psi = a.psi;
  return t;
}

Vec3 ParamTable::point_at_phi(const LineRange& line, double phi) const {
  const SampleRecord& first = records_[line.begin];
  if (phi >= first.param.phi) return first.position;
  for (std::size_t r = line.begin + 1; r < line.end; ++r) {
    const SampleRecord& b = records_[r];
    if (phi == b.param.phi) return b.position;
    if (phi > b.param.phi) {
      const SampleRecord& a = records_[r - 1];
      const double t = (a.param.phi - phi) / (a.param.phi - b.param.phi);
      return a.position + t * (b.position - a.position);
    }
  }
  // Past the last sample: bisect along the ray from the center (phi = 0) to
  // the endpoint for the requested level.
  const Vec3 end = records_[line.end - 1].position;
  const FieldSampler sampler(*grid_);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < kRayBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    (sampler.sample_phi(center_ + mid * (end - center_)) < phi ? lo : hi) = mid;
  }
  return center_ + (0.5 * (lo + hi)) * (end - center_);
}

Vec3 ParamTable::inverse_map(const ParamTriple& t) const {
  const Vec3 dir = to_sphere(t);
  std::vector<double> angle(lines_.size());
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    angle[l] = angle_between(dir, records_[lines_[l].begin].direction);
  }
  const auto nearest = k_smallest(angle, static_cast<std::size_t>(cfg_.k));
  if (angle[nearest.front()] == 0.0) return point_at_phi(lines_[nearest.front()], t.phi);
  if (angle[nearest.front()] > cfg_.max_angle) {
    throw NoNearbySamples("no streamline within " + std::to_string(cfg_.max_angle) +
                          " rad of the requested direction");
  }
  Vec3 sum;
  double weight = 0.0;
  for (std::size_t l : nearest) {
    const double w = 1.0 / angle[l];
    sum += w * point_at_phi(lines_[l], t.phi);
    weight += w;
  }
  return sum / weight;
}

}  // namespace harmap
