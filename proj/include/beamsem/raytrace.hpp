#pragma once

#include <complex>
#include <map>
#include <span>
#include <vector>

#include "beamsem/channel.hpp"
#include "beamsem/scene.hpp"

namespace beamsem {

struct RayTraceConfig {
  int max_reflections = 2;
  double carrier_frequency = 60e9;
  int max_paths = 25;
  std::map<Material, double> reflection_coeff{{Material::metal, 0.95}, {Material::concrete, 0.6}};

  [[nodiscard]] double wavelength() const;
  [[nodiscard]] double coefficient(Material m) const;
  void validate() const;
};

/// Free-space amplitude with flat per-bounce reflection losses:
/// (lambda / (4 pi d)) * prod(Gamma) * exp(-j 2 pi d / lambda).
[[nodiscard]] cplx path_gain(double length, std::span<const Material> materials, const RayTraceConfig& cfg);

/// One planar rectangle of a cuboid, with outward normal.
struct Face {
  Vec3 center;
  Vec3 normal;
  Vec3 u_axis;
  Vec3 v_axis;
  double half_u = 0.0;
  double half_v = 0.0;
  Material material = Material::metal;
  int owner = -1;  ///< index into the occluder list
};

[[nodiscard]] std::vector<Face> cuboid_faces(const Cuboid& box, int owner);

[[nodiscard]] Vec3 mirror_point(const Vec3& p, const Face& plane);

/// True if the open segment (a, b) passes through the interior of `box`.
/// Segments that only touch the surface (e.g. start on a face and leave it)
/// are not blocked.
[[nodiscard]] bool segment_hits_box(const Vec3& a, const Vec3& b, const Cuboid& box);

/// LOS plus specular reflection paths up to cfg.max_reflections, by the image
/// method. Every cuboid except the MS's own vehicle both reflects and blocks.
/// Paths are sorted by descending |gain| and truncated to cfg.max_paths; an
/// empty result is a legal outage.
[[nodiscard]] std::vector<PathComponent> trace_paths(const Scene& scene, const RayTraceConfig& cfg);

/// Blockage verdict for the direct BS-MS segment.
[[nodiscard]] bool line_of_sight(const Scene& scene);

/// Full geometric record of a traced path: BS, reflection points, MS.
struct TracedPath {
  PathComponent path;
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

/// As trace_paths but keeps the vertex chain; used for geometric validation.
[[nodiscard]] std::vector<TracedPath> trace_paths_detailed(const Scene& scene, const RayTraceConfig& cfg);

}  // namespace beamsem
