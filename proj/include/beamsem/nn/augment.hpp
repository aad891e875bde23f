#pragma once

#include <cstdint>

#include "beamsem/nn/tensor.hpp"
#include "beamsem/scene.hpp"
#include "beamsem/semantics.hpp"

namespace beamsem::nn {

/// Heatmap as a (2 * cameras, rows, cols) tensor, distribution planes first.
[[nodiscard]] Tensor heatmap_tensor(const SemanticHeatmap& hm);
[[nodiscard]] SemanticHeatmap heatmap_from_tensor(const Tensor& t);

struct CorruptionConfig {
  /// Strength perturbation std per unit of noise level (relative).
  double strength_noise_per_px = 0.1;
  /// Peak drop probability per unit of noise level, capped at 1.
  double drop_per_px = 0.05;
  /// D value a pixel needs to count as a peak before corruption.
  double peak_threshold = 0.5;
};

/// Emulates stage-1 prediction error: decodes the peaks of `hm`, jitters
/// their positions by N(0, noise_level^2) heatmap pixels, perturbs strengths,
/// drops peaks with probability min(1, drop_per_px * noise_level), and
/// re-rasterizes with cfg.sigma. noise_level == 0 returns `hm` unchanged.
[[nodiscard]] SemanticHeatmap corrupt_heatmaps(const SemanticHeatmap& hm, double noise_level, std::uint64_t seed,
                                               const CameraConfig& cfg, const CorruptionConfig& opts = {});

/// Depth-shaded cuboid silhouettes per camera at heatmap resolution, shape
/// (cameras, rows, cols). Stands in for camera images: every cuboid except
/// the MS's own vehicle and the ground is projected corner by corner and its
/// convex hull filled with 1 / (1 + distance / 10 m); overlaps keep the max.
[[nodiscard]] Tensor rasterize_pseudo_image(const Scene& scene, const CameraConfig& cfg);

}  // namespace beamsem::nn
