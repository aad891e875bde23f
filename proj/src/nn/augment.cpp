#include "beamsem/nn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beamsem/rng.hpp"

namespace beamsem::nn {

Tensor heatmap_tensor(const SemanticHeatmap& hm) {
  const auto c = static_cast<std::size_t>(hm.cameras());
  Tensor t({2 * c, static_cast<std::size_t>(hm.rows()), static_cast<std::size_t>(hm.cols())});
  const auto d = hm.distribution_data();
  const auto s = hm.strength_data();
  std::copy(d.begin(), d.end(), t.values().begin());
  std::copy(s.begin(), s.end(), t.values().begin() + static_cast<std::ptrdiff_t>(d.size()));
  return t;
}

SemanticHeatmap heatmap_from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) % 2 != 0) throw std::invalid_argument("heatmap tensor must be (2 * cameras, rows, cols)");
  const int cams = static_cast<int>(t.dim(0) / 2);
  SemanticHeatmap hm(cams, static_cast<int>(t.dim(1)), static_cast<int>(t.dim(2)));
  for (int c = 0; c < cams; ++c)
    for (int r = 0; r < hm.rows(); ++r)
      for (int col = 0; col < hm.cols(); ++col) {
        hm.distribution(c, r, col) = std::clamp(t.at(static_cast<std::size_t>(c), static_cast<std::size_t>(r), static_cast<std::size_t>(col)), 0.0, 1.0);
        hm.strength(c, r, col) =
            std::clamp(t.at(static_cast<std::size_t>(c + cams), static_cast<std::size_t>(r), static_cast<std::size_t>(col)), 0.0, 1.0);
      }
  return hm;
}

SemanticHeatmap corrupt_heatmaps(const SemanticHeatmap& hm, double noise_level, std::uint64_t seed,
                                 const CameraConfig& cfg, const CorruptionConfig& opts) {
  if (noise_level < 0.0) throw std::invalid_argument("corrupt_heatmaps: noise level must be >= 0");
  if (noise_level == 0.0) return hm;
  if (hm.rows() != cfg.heatmap_rows() || hm.cols() != cfg.heatmap_cols() ||
      hm.cameras() != static_cast<int>(cfg.count())) {
    throw std::invalid_argument("corrupt_heatmaps: heatmap does not match the camera config");
  }
  Rng rng(seed);
  const double drop = std::min(1.0, opts.drop_per_px * noise_level);
  std::vector<EffectiveScatterer> kept;
  for (const auto& peak : decode_heatmaps(hm, opts.peak_threshold)) {
    // Draw every random quantity up front so the stream does not depend on
    // which branch is taken.
    const bool dropped = rng.bernoulli(drop);
    const double dr = rng.normal() * noise_level;
    const double dc = rng.normal() * noise_level;
    const double ds = rng.normal() * opts.strength_noise_per_px * noise_level;
    if (dropped) continue;
    EffectiveScatterer e;
    e.camera = peak.camera;
    e.heatmap_row = std::clamp(static_cast<int>(std::lround(peak.row + dr)), 0, hm.rows() - 1);
    e.heatmap_col = std::clamp(static_cast<int>(std::lround(peak.col + dc)), 0, hm.cols() - 1);
    e.image_point = {static_cast<double>(e.heatmap_row * cfg.downsample), static_cast<double>(e.heatmap_col * cfg.downsample)};
    e.relative_power = std::clamp(hm.strength(peak.camera, peak.row, peak.col) * (1.0 + ds), 0.0, 1.0);
    kept.push_back(e);
  }
  return rasterize_heatmaps(kept, cfg);
}

namespace {

struct P2 {
  double r;
  double c;
};

double cross(const P2& o, const P2& a, const P2& b) { return (a.c - o.c) * (b.r - o.r) - (a.r - o.r) * (b.c - o.c); }

std::vector<P2> convex_hull(std::vector<P2> pts) {
  std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) { return a.c < b.c || (a.c == b.c && a.r < b.r); });
  if (pts.size() < 3) return pts;
  std::vector<P2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool inside_convex(const std::vector<P2>& hull, const P2& p) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0.0) return false;
  }
  return true;
}

}  // namespace

Tensor rasterize_pseudo_image(const Scene& scene, const CameraConfig& cfg) {
  cfg.validate();
  const auto rows = static_cast<std::size_t>(cfg.heatmap_rows());
  const auto cols = static_cast<std::size_t>(cfg.heatmap_cols());
  Tensor img({cfg.count(), rows, cols});
  constexpr double kLimit = 89.0 * std::numbers::pi / 180.0;

  std::vector<const Cuboid*> boxes;
  for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
    if (static_cast<int>(i) != scene.ms_vehicle) boxes.push_back(&scene.vehicles[i]);
  }
  for (const auto& w : scene.walls) {
    if (w.center.z() + w.half_extents.z() > 0.0) boxes.push_back(&w);
  }

  for (std::size_t cam = 0; cam < cfg.count(); ++cam) {
    const Camera& camera = cfg.cameras[cam];
    const double focal = static_cast<double>(cfg.image_cols) / (2.0 * std::tan(camera.half_fov));
    for (const Cuboid* box : boxes) {
      std::vector<P2> corners;
      for (int corner = 0; corner < 8; ++corner) {
        const Vec3 local{(corner & 1 ? 1.0 : -1.0) * box->half_extents.x(), (corner & 2 ? 1.0 : -1.0) * box->half_extents.y(),
                         (corner & 4 ? 1.0 : -1.0) * box->half_extents.z()};
        const Vec3 d = box->center + box->to_world_direction(local) - scene.ms_position;
        const double n = d.norm();
        if (n <= 0.0) continue;
        const double elevation = std::acos(std::clamp(d.z() / n, -1.0, 1.0));
        const double azimuth = wrap_angle(std::atan2(d.y(), d.x()) - scene.ms_yaw);
        const double theta = elevation - camera.elevation;
        const double phi = wrap_angle(azimuth - camera.azimuth);
        if (std::abs(phi) >= kLimit || std::abs(theta) >= kLimit) continue;
        const double r = focal * std::tan(theta) / std::cos(phi) + 0.5 * cfg.image_rows;
        const double c = focal * std::tan(phi) + 0.5 * cfg.image_cols;
        corners.push_back({r / cfg.downsample, c / cfg.downsample});
      }
      if (corners.size() < 3) continue;
      const auto hull = convex_hull(std::move(corners));
      if (hull.size() < 3) continue;
      double r_min = hull[0].r, r_max = hull[0].r, c_min = hull[0].c, c_max = hull[0].c;
      for (const auto& p : hull) {
        r_min = std::min(r_min, p.r);
        r_max = std::max(r_max, p.r);
        c_min = std::min(c_min, p.c);
        c_max = std::max(c_max, p.c);
      }
      const auto clamp_index = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(n)));
      };
      const std::size_t r0 = clamp_index(r_min, rows), r1 = clamp_index(r_max + 1.0, rows);
      const std::size_t c0 = clamp_index(c_min, cols), c1 = clamp_index(c_max + 1.0, cols);
      const double shade = 1.0 / (1.0 + (box->center - scene.ms_position).norm() / 10.0);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          if (!inside_convex(hull, {static_cast<double>(r) + 0.5, static_cast<double>(c) + 0.5})) continue;
          double& px = img.at(cam, r, c);
          px = std::max(px, shade);
        }
      }
    }
  }
  return img;
}

}  // namespace beamsem::nn
