#include "beamsem/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "beamsem/error.hpp"

namespace beamsem {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
}  // namespace

void CameraConfig::validate() const {
  if (cameras.empty()) throw std::invalid_argument("camera config needs at least one camera");
  if (image_rows <= 0 || image_cols <= 0 || downsample <= 0) throw std::invalid_argument("image size and downsample must be positive");
  if (image_rows % downsample != 0 || image_cols % downsample != 0) {
    throw std::invalid_argument("downsample factor must divide the image size");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel sigma must be positive");
  for (const auto& c : cameras) {
    if (!(c.half_fov > 0.0 && c.half_fov < 0.5 * kPi)) throw std::invalid_argument("camera half FOV must be in (0, pi/2)");
  }
}

CameraConfig default_camera_config() {
  CameraConfig cfg;
  for (const double az : {0.0, 90.0, 180.0, 270.0}) cfg.cameras.push_back({90.0 * kDeg, az * kDeg, 45.0 * kDeg});
  return cfg;
}

SemanticHeatmap::SemanticHeatmap(int cameras, int rows, int cols)
    : cameras_(cameras),
      rows_(rows),
      cols_(cols),
      distribution_(static_cast<std::size_t>(cameras) * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0),
      strength_(distribution_.size(), 0.0) {
  if (cameras < 0 || rows < 0 || cols < 0) throw std::invalid_argument("negative heatmap dimensions");
}

std::span<const double> SemanticHeatmap::distribution_plane(int camera) const {
  return std::span<const double>(distribution_).subspan(static_cast<std::size_t>(camera) * plane_size(), plane_size());
}

std::span<const double> SemanticHeatmap::strength_plane(int camera) const {
  return std::span<const double>(strength_).subspan(static_cast<std::size_t>(camera) * plane_size(), plane_size());
}

std::vector<ScattererSource> extract_effective_scatterers(std::span<const PathComponent> paths, double p_th_db,
                                                          const Scene& scene) {
  if (paths.empty()) throw NoPathsError("extract_effective_scatterers");
  const auto powers = relative_powers(paths);
  std::vector<ScattererSource> out;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    // Compare in dB so the threshold is applied exactly as configured.
    if (10.0 * std::log10(powers[p]) < p_th_db) continue;
    ScattererSource s;
    s.point = paths[p].is_los ? scene.bs_position : paths[p].last_hop_point;
    s.relative_power = powers[p];
    s.is_los = paths[p].is_los;
    s.path_index = p;
    s.aoa_elevation = paths[p].aoa_elevation;
    s.aoa_azimuth = paths[p].aoa_azimuth;
    out.push_back(s);
  }
  return out;
}

std::optional<ImagePoint> project_to_camera(double aoa_elevation, double aoa_azimuth, const Camera& cam,
                                            const CameraConfig& cfg) {
  const double theta = aoa_elevation - cam.elevation;
  const double phi = wrap_angle(aoa_azimuth - cam.azimuth);
  if (!(std::abs(phi) < cam.half_fov)) return std::nullopt;
  if (!(std::abs(theta) < 0.5 * kPi)) return std::nullopt;
  const double focal = static_cast<double>(cfg.image_cols) / (2.0 * std::tan(cam.half_fov));
  ImagePoint pt;
  pt.row = focal * std::tan(theta) / std::cos(phi) + 0.5 * static_cast<double>(cfg.image_rows);
  pt.col = focal * std::tan(phi) + 0.5 * static_cast<double>(cfg.image_cols);
  if (!(pt.row >= 0.0 && pt.row < static_cast<double>(cfg.image_rows))) return std::nullopt;
  if (!(pt.col >= 0.0 && pt.col < static_cast<double>(cfg.image_cols))) return std::nullopt;
  return pt;
}

std::vector<EffectiveScatterer> locate_scatterers(std::span<const ScattererSource> sources, const CameraConfig& cfg) {
  std::vector<EffectiveScatterer> out;
  for (const auto& src : sources) {
    for (std::size_t c = 0; c < cfg.cameras.size(); ++c) {
      const auto pt = project_to_camera(src.aoa_elevation, src.aoa_azimuth, cfg.cameras[c], cfg);
      if (!pt) continue;
      EffectiveScatterer e;
      e.camera = static_cast<int>(c);
      e.image_point = *pt;
      e.heatmap_row = static_cast<int>(std::floor(pt->row / cfg.downsample));
      e.heatmap_col = static_cast<int>(std::floor(pt->col / cfg.downsample));
      e.relative_power = src.relative_power;
      e.source_path = src.path_index;
      out.push_back(e);
    }
  }
  return out;
}

SemanticHeatmap rasterize_heatmaps(std::span<const EffectiveScatterer> scatterers, const CameraConfig& cfg) {
  const int rows = cfg.heatmap_rows();
  const int cols = cfg.heatmap_cols();
  SemanticHeatmap hm(static_cast<int>(cfg.count()), rows, cols);
  const int radius = static_cast<int>(std::ceil(3.0 * cfg.sigma));
  const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  for (const auto& s : scatterers) {
    if (s.camera < 0 || s.camera >= hm.cameras() || s.heatmap_row < 0 || s.heatmap_row >= rows || s.heatmap_col < 0 ||
        s.heatmap_col >= cols) {
      throw std::out_of_range("rasterize_heatmaps: scatterer outside the heatmap");
    }
    const int r0 = std::max(0, s.heatmap_row - radius);
    const int r1 = std::min(rows - 1, s.heatmap_row + radius);
    const int c0 = std::max(0, s.heatmap_col - radius);
    const int c1 = std::min(cols - 1, s.heatmap_col + radius);
    for (int r = r0; r <= r1; ++r) {
      const int dr = r - s.heatmap_row;
      for (int c = c0; c <= c1; ++c) {
        const int dc = c - s.heatmap_col;
        const double k = std::exp(-static_cast<double>(dr * dr + dc * dc) * inv_two_sigma2);
        double& d = hm.distribution(s.camera, r, c);
        double& st = hm.strength(s.camera, r, c);
        d = std::max(d, k);
        st = std::max(st, std::clamp(s.relative_power, 0.0, 1.0) * k);
      }
    }
  }
  return hm;
}

std::vector<Detection> decode_heatmaps(const SemanticHeatmap& hm, double detect_threshold) {
  std::vector<Detection> out;
  for (int cam = 0; cam < hm.cameras(); ++cam) {
    for (int r = 0; r < hm.rows(); ++r) {
      for (int c = 0; c < hm.cols(); ++c) {
        const double v = hm.distribution(cam, r, c);
        if (!(v > 0.0) || v < detect_threshold) continue;
        bool peak = true;
        for (int dr = -1; dr <= 1 && peak; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || rr >= hm.rows() || cc < 0 || cc >= hm.cols()) continue;
            const double q = hm.distribution(cam, rr, cc);
            const bool earlier = dr < 0 || (dr == 0 && dc < 0);
            if (q > v || (q == v && earlier)) {
              peak = false;
              break;
            }
          }
        }
        if (peak) out.push_back({cam, r, c, v});
      }
    }
  }
  return out;
}

PrecisionRecall precision_recall(std::span<const Detection> detections, std::span<const HeatmapPoint> ground_truth,
                                 double distance_threshold_px) {
  PrecisionRecall pr;
  pr.predicted = detections.size();
  pr.ground_truth = ground_truth.size();

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });

  std::vector<bool> taken(ground_truth.size(), false);
  for (const auto di : order) {
    const auto& d = detections[di];
    std::size_t best = ground_truth.size();
    double best_dist = distance_threshold_px;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g] || ground_truth[g].camera != d.camera) continue;
      const double dist = std::hypot(ground_truth[g].row - d.row, ground_truth[g].col - d.col);
      if (dist <= best_dist && (best == ground_truth.size() || dist < best_dist)) {
        best = g;
        best_dist = dist;
      }
    }
    if (best < ground_truth.size()) {
      taken[best] = true;
      ++pr.matched;
    }
  }
  const auto n_d = static_cast<double>(pr.matched);
  pr.precision = pr.predicted > 0 ? n_d / static_cast<double>(pr.predicted) : (pr.ground_truth == 0 ? 1.0 : 0.0);
  pr.recall = pr.ground_truth > 0 ? n_d / static_cast<double>(pr.ground_truth) : 1.0;
  return pr;
}

std::vector<HeatmapPoint> heatmap_points(std::span<const EffectiveScatterer> scatterers) {
  std::vector<HeatmapPoint> out;
  out.reserve(scatterers.size());
  for (const auto& s : scatterers) out.push_back({s.camera, static_cast<double>(s.heatmap_row), static_cast<double>(s.heatmap_col)});
  return out;
}

double mean_effective_scatterers(std::span<const std::vector<EffectiveScatterer>> samples, std::size_t cameras) {
  if (samples.empty()) throw std::invalid_argument("mean_effective_scatterers: empty dataset");
  if (cameras == 0) throw std::invalid_argument("mean_effective_scatterers: no cameras");
  std::size_t total = 0;
  for (const auto& s : samples) total += s.size();
  return static_cast<double>(total) / (static_cast<double>(samples.size()) * static_cast<double>(cameras));
}

void write_pgm(const std::filesystem::path& path, std::span<const double> plane, int rows, int cols) {
  if (plane.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("write_pgm: plane size does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (const double v : plane) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace beamsem
