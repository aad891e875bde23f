#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "beamsem/channel.hpp"
#include "beamsem/scene.hpp"

namespace beamsem {

struct Camera {
  double elevation = 0.0;  ///< optical axis, zenith-referenced
  double azimuth = 0.0;    ///< optical axis in the MS frame
  double half_fov = 0.0;   ///< beta, horizontal half field of view
};

struct CameraConfig {
  std::vector<Camera> cameras;
  int image_rows = 192;  ///< H_C
  int image_cols = 512;  ///< W_C
  int downsample = 4;    ///< R
  double sigma = 1.5;    ///< kernel width in heatmap pixels

  [[nodiscard]] std::size_t count() const { return cameras.size(); }
  [[nodiscard]] int heatmap_rows() const { return image_rows / downsample; }
  [[nodiscard]] int heatmap_cols() const { return image_cols / downsample; }
  void validate() const;
};

/// Four horizontal cameras at 0/90/180/270 degrees, 90 degree FOV,
/// 192 x 512 images, R = 4, sigma = 1.5.
[[nodiscard]] CameraConfig default_camera_config();

struct ImagePoint {
  double row = 0.0;  ///< x^C, vertical
  double col = 0.0;  ///< y^C, horizontal
};

/// A dominant path's reflector (or the BS, for the LOS path) in world space.
struct ScattererSource {
  Vec3 point = Vec3::Zero();
  double relative_power = 1.0;
  bool is_los = false;
  std::size_t path_index = 0;
  double aoa_elevation = 0.0;
  double aoa_azimuth = 0.0;
};

struct EffectiveScatterer {
  int camera = 0;
  ImagePoint image_point;
  int heatmap_row = 0;
  int heatmap_col = 0;
  double relative_power = 1.0;
  std::size_t source_path = 0;
};

/// Per-camera distribution (D) and strength (S) planes, each
/// cameras x rows x cols, camera-major.
class SemanticHeatmap {
 public:
  SemanticHeatmap() = default;
  SemanticHeatmap(int cameras, int rows, int cols);

  [[nodiscard]] int cameras() const { return cameras_; }
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t plane_size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }

  [[nodiscard]] std::size_t index(int camera, int row, int col) const {
    return (static_cast<std::size_t>(camera) * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(col);
  }
  double& distribution(int camera, int row, int col) { return distribution_[index(camera, row, col)]; }
  [[nodiscard]] double distribution(int camera, int row, int col) const { return distribution_[index(camera, row, col)]; }
  double& strength(int camera, int row, int col) { return strength_[index(camera, row, col)]; }
  [[nodiscard]] double strength(int camera, int row, int col) const { return strength_[index(camera, row, col)]; }

  [[nodiscard]] std::span<const double> distribution_data() const { return distribution_; }
  [[nodiscard]] std::span<const double> strength_data() const { return strength_; }
  [[nodiscard]] std::span<const double> distribution_plane(int camera) const;
  [[nodiscard]] std::span<const double> strength_plane(int camera) const;

  bool operator==(const SemanticHeatmap&) const = default;

 private:
  int cameras_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> distribution_;
  std::vector<double> strength_;
};

struct Detection {
  int camera = 0;
  int row = 0;
  int col = 0;
  double score = 0.0;
};

struct HeatmapPoint {
  int camera = 0;
  double row = 0.0;
  double col = 0.0;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t predicted = 0;
  std::size_t ground_truth = 0;
  std::size_t matched = 0;
};

/// Paths whose relative power in dB is >= p_th_db. NLOS paths contribute
/// their last reflection point, the LOS path contributes the BS.
[[nodiscard]] std::vector<ScattererSource> extract_effective_scatterers(std::span<const PathComponent> paths,
                                                                        double p_th_db, const Scene& scene);

/// Maps an arrival direction into the image plane of `cam`. Returns nullopt
/// when the direction is outside the horizontal field of view or the point
/// falls outside the image.
[[nodiscard]] std::optional<ImagePoint> project_to_camera(double aoa_elevation, double aoa_azimuth, const Camera& cam,
                                                          const CameraConfig& cfg);

/// Projects every source into every camera that sees it.
[[nodiscard]] std::vector<EffectiveScatterer> locate_scatterers(std::span<const ScattererSource> sources,
                                                                const CameraConfig& cfg);

[[nodiscard]] SemanticHeatmap rasterize_heatmaps(std::span<const EffectiveScatterer> scatterers, const CameraConfig& cfg);

/// 3x3 non-maximum suppression on the D planes.
[[nodiscard]] std::vector<Detection> decode_heatmaps(const SemanticHeatmap& hm, double detect_threshold);

/// Greedy one-to-one matching in descending score order.
[[nodiscard]] PrecisionRecall precision_recall(std::span<const Detection> detections,
                                               std::span<const HeatmapPoint> ground_truth, double distance_threshold_px);

[[nodiscard]] std::vector<HeatmapPoint> heatmap_points(std::span<const EffectiveScatterer> scatterers);

/// Average in-view scatterers per camera view over a set of samples.
[[nodiscard]] double mean_effective_scatterers(std::span<const std::vector<EffectiveScatterer>> samples,
                                               std::size_t cameras);

/// 8-bit binary PGM, value round(255 * clamp(v, 0, 1)).
void write_pgm(const std::filesystem::path& path, std::span<const double> plane, int rows, int cols);

}  // namespace beamsem
