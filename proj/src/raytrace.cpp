#include "beamsem/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamsem {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
// Reflection points closer than this to a face edge are rejected.
constexpr double kEdgeTolerance = 1e-9;
constexpr double kSideTolerance = 1e-9;
constexpr double kOverlapTolerance = 1e-9;

struct Occluders {
  std::vector<const Cuboid*> boxes;
  std::vector<Face> faces;
};

Occluders collect_occluders(const Scene& scene) {
  Occluders occ;
  for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
    if (static_cast<int>(i) == scene.ms_vehicle) continue;
    occ.boxes.push_back(&scene.vehicles[i]);
  }
  for (const auto& w : scene.walls) occ.boxes.push_back(&w);
  for (std::size_t i = 0; i < occ.boxes.size(); ++i) {
    auto faces = cuboid_faces(*occ.boxes[i], static_cast<int>(i));
    occ.faces.insert(occ.faces.end(), faces.begin(), faces.end());
  }
  return occ;
}

bool segment_clear(const Vec3& a, const Vec3& b, const Occluders& occ) {
  return std::none_of(occ.boxes.begin(), occ.boxes.end(), [&](const Cuboid* box) { return segment_hits_box(a, b, *box); });
}

double signed_distance(const Vec3& p, const Face& f) { return f.normal.dot(p - f.center); }

void direction_angles(const Vec3& d, double& elevation, double& azimuth) {
  const double n = d.norm();
  elevation = std::acos(std::clamp(d.z() / n, -1.0, 1.0));
  azimuth = std::atan2(d.y(), d.x());
}

class ImageTracer {
 public:
  ImageTracer(const Scene& scene, const RayTraceConfig& cfg, const Occluders& occ)
      : scene_(scene), cfg_(cfg), occ_(occ) {}

  std::vector<TracedPath> run() {
    if (segment_clear(scene_.bs_position, scene_.ms_position, occ_)) {
      emit({scene_.bs_position, scene_.ms_position}, {});
    }
    if (cfg_.max_reflections > 0) {
      images_.push_back(scene_.bs_position);
      descend();
    }
    return std::move(out_);
  }

 private:
  void descend() {
    const std::size_t depth = sequence_.size();
    const Vec3 source = images_.back();
    for (std::size_t fi = 0; fi < occ_.faces.size(); ++fi) {
      const Face& face = occ_.faces[fi];
      // A convex box cannot reflect twice in a row.
      if (depth > 0 && occ_.faces[sequence_.back()].owner == face.owner) continue;
      if (signed_distance(source, face) <= kSideTolerance) continue;
      sequence_.push_back(fi);
      images_.push_back(mirror_point(source, face));
      if (signed_distance(scene_.ms_position, face) > kSideTolerance) try_sequence();
      if (static_cast<int>(sequence_.size()) < cfg_.max_reflections) descend();
      images_.pop_back();
      sequence_.pop_back();
    }
  }

  void try_sequence() {
    const std::size_t k = sequence_.size();
    std::vector<Vec3> points(k + 2);
    points.front() = scene_.bs_position;
    points.back() = scene_.ms_position;
    Vec3 target = scene_.ms_position;
    for (std::size_t m = k; m >= 1; --m) {
      const Face& face = occ_.faces[sequence_[m - 1]];
      const Vec3& image = images_[m];
      const Vec3 dir = target - image;
      const double denom = face.normal.dot(dir);
      if (std::abs(denom) < 1e-15) return;
      const double t = face.normal.dot(face.center - image) / denom;
      if (!(t > 0.0 && t < 1.0)) return;
      const Vec3 hit = image + t * dir;
      const Vec3 rel = hit - face.center;
      if (std::abs(rel.dot(face.u_axis)) >= face.half_u - kEdgeTolerance) return;
      if (std::abs(rel.dot(face.v_axis)) >= face.half_v - kEdgeTolerance) return;
      points[m] = hit;
      target = hit;
    }
    for (std::size_t m = 1; m <= k; ++m) {
      const Face& face = occ_.faces[sequence_[m - 1]];
      if (signed_distance(points[m - 1], face) <= kSideTolerance) return;
      if (signed_distance(points[m + 1], face) <= kSideTolerance) return;
    }
    for (std::size_t m = 0; m + 1 < points.size(); ++m) {
      if (!segment_clear(points[m], points[m + 1], occ_)) return;
    }
    std::vector<Face> faces;
    faces.reserve(k);
    for (auto fi : sequence_) faces.push_back(occ_.faces[fi]);
    emit(std::move(points), std::move(faces));
  }

  void emit(std::vector<Vec3> points, std::vector<Face> faces) {
    TracedPath tp;
    PathComponent& p = tp.path;
    double length = 0.0;
    for (std::size_t m = 0; m + 1 < points.size(); ++m) length += (points[m + 1] - points[m]).norm();
    std::vector<Material> materials;
    materials.reserve(faces.size());
    for (const auto& f : faces) materials.push_back(f.material);

    p.path_length = length;
    p.bounce_count = static_cast<int>(faces.size());
    p.is_los = faces.empty();
    p.gain = path_gain(length, materials, cfg_);
    direction_angles(points[1] - points[0], p.aod_elevation, p.aod_azimuth);
    const Vec3& last_hop = points[points.size() - 2];
    double arrival_azimuth = 0.0;
    direction_angles(last_hop - points.back(), p.aoa_elevation, arrival_azimuth);
    p.aoa_azimuth = wrap_angle(arrival_azimuth - scene_.ms_yaw);
    p.last_hop_point = last_hop;

    tp.vertices = std::move(points);
    tp.faces = std::move(faces);
    out_.push_back(std::move(tp));
  }

  const Scene& scene_;
  const RayTraceConfig& cfg_;
  const Occluders& occ_;
  std::vector<std::size_t> sequence_;
  std::vector<Vec3> images_;
  std::vector<TracedPath> out_;
};

}  // namespace

double RayTraceConfig::wavelength() const { return kSpeedOfLight / carrier_frequency; }

double RayTraceConfig::coefficient(Material m) const {
  const auto it = reflection_coeff.find(m);
  if (it == reflection_coeff.end()) throw std::invalid_argument(std::string("no reflection coefficient for ") + to_string(m));
  return it->second;
}

void RayTraceConfig::validate() const {
  if (max_reflections < 0 || max_reflections > 6) throw std::invalid_argument("max_reflections must be in [0, 6]");
  if (max_paths < 1) throw std::invalid_argument("max_paths must be >= 1");
  if (!(carrier_frequency > 0.0)) throw std::invalid_argument("carrier_frequency must be positive");
  for (const auto& [m, g] : reflection_coeff) {
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("reflection coefficients must lie in (0, 1]");
  }
}

cplx path_gain(double length, std::span<const Material> materials, const RayTraceConfig& cfg) {
  if (!(length > 0.0)) throw std::invalid_argument("path_gain: length must be positive");
  const double lambda = cfg.wavelength();
  double magnitude = lambda / (4.0 * std::numbers::pi * length);
  for (const auto m : materials) magnitude *= cfg.coefficient(m);
  const double phase = -2.0 * std::numbers::pi * std::fmod(length / lambda, 1.0);
  return std::polar(magnitude, phase);
}

std::vector<Face> cuboid_faces(const Cuboid& box, int owner) {
  std::vector<Face> faces;
  faces.reserve(6);
  const Vec3 axes[3] = {box.to_world_direction(Vec3::UnitX()), box.to_world_direction(Vec3::UnitY()),
                        Vec3::UnitZ()};
  for (int k = 0; k < 3; ++k) {
    const int ku = (k + 1) % 3;
    const int kv = (k + 2) % 3;
    for (const double sign : {1.0, -1.0}) {
      Face f;
      f.normal = sign * axes[k];
      f.center = box.center + box.half_extents[k] * f.normal;
      f.u_axis = axes[ku];
      f.v_axis = axes[kv];
      f.half_u = box.half_extents[ku];
      f.half_v = box.half_extents[kv];
      f.material = box.material;
      f.owner = owner;
      faces.push_back(f);
    }
  }
  return faces;
}

Vec3 mirror_point(const Vec3& p, const Face& plane) {
  return p - 2.0 * signed_distance(p, plane) * plane.normal;
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const Cuboid& box) {
  const Vec3 origin = box.to_local(a);
  const Vec3 dir = box.to_local(b) - origin;
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double h = box.half_extents[k];
    if (std::abs(dir[k]) < 1e-300) {
      if (std::abs(origin[k]) >= h) return false;
      continue;
    }
    double t0 = (-h - origin[k]) / dir[k];
    double t1 = (h - origin[k]) / dir[k];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_exit - t_enter <= kOverlapTolerance) return false;
  }
  return t_exit - t_enter > kOverlapTolerance;
}

bool line_of_sight(const Scene& scene) {
  const auto occ = collect_occluders(scene);
  return segment_clear(scene.bs_position, scene.ms_position, occ);
}

std::vector<TracedPath> trace_paths_detailed(const Scene& scene, const RayTraceConfig& cfg) {
  cfg.validate();
  const auto occ = collect_occluders(scene);
  auto paths = ImageTracer(scene, cfg, occ).run();
  std::stable_sort(paths.begin(), paths.end(), [](const TracedPath& a, const TracedPath& b) {
    return std::abs(a.path.gain) > std::abs(b.path.gain);
  });
  if (paths.size() > static_cast<std::size_t>(cfg.max_paths)) paths.resize(static_cast<std::size_t>(cfg.max_paths));
  return paths;
}

std::vector<PathComponent> trace_paths(const Scene& scene, const RayTraceConfig& cfg) {
  auto detailed = trace_paths_detailed(scene, cfg);
  std::vector<PathComponent> out;
  out.reserve(detailed.size());
  for (auto& d : detailed) out.push_back(d.path);
  return out;
}

}  // namespace beamsem
