#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamsem/codebook.hpp"
#include "beamsem/nn/augment.hpp"
#include "beamsem/nn/models.hpp"
#include "beamsem/scene.hpp"
#include "beamsem/semantics.hpp"

namespace beamsem::nn {

struct TrainConfig {
  double beta = 0.8;
  int epochs = 30;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  /// Halve the learning rate whenever an epoch fails to improve the best
  /// training loss.
  bool halve_on_plateau = true;
  /// Global gradient norm cap per step; <= 0 disables clipping.
  double grad_clip = 5.0;
  /// Jitter applied to ground-truth heatmaps during semantic training.
  double heatmap_noise = 0.0;
  CorruptionConfig corruption;

  void validate() const;
};

/// One prepared example. Heatmaps and pseudo images are regenerated from
/// `scatterers` / `scene` on demand rather than stored.
struct TrainingSample {
  Tensor location;
  std::vector<EffectiveScatterer> scatterers;
  std::optional<Scene> scene;     ///< needed by joint models only
  std::vector<double> gains;      ///< gain of every candidate pair
  std::size_t label = 0;          ///< best candidate
  BeamPair optimal;               ///< best pair over the full codebooks
  double optimal_gain = 0.0;
  bool is_los = true;
  std::uint64_t key = 0;          ///< stable id used to seed per-sample noise
};

struct EpochStats {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double top1 = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> trace;
};

/// Mini-batch momentum SGD on the beam loss (plus the heatmap loss for joint
/// models). Per-sample gradients are summed in sample order, so results are
/// bit-reproducible for a given seed. Throws std::invalid_argument on an
/// empty training set.
TrainResult train(BeamModel& model, std::span<const TrainingSample> train_set, const TrainConfig& cfg,
                  const CameraConfig& cameras, std::span<const TrainingSample> validation = {});

/// Softmax output over the model's candidates.
[[nodiscard]] std::vector<double> predict(BeamModel& model, const TrainingSample& sample, const CameraConfig& cameras);

/// Network input tensors for `sample` (heatmap and / or pseudo image as the
/// model kind requires). `noise` > 0 corrupts the heatmap with `noise_seed`.
struct PreparedInput {
  Tensor heatmap;
  Tensor image;
  Tensor target_heatmap;
};
[[nodiscard]] PreparedInput prepare_input(const BeamModel& model, const TrainingSample& sample, const CameraConfig& cameras,
                                          double noise = 0.0, std::uint64_t noise_seed = 0,
                                          const CorruptionConfig& corruption = {});

/// Average loss and top-1 accuracy (against `label`) without updating anything.
[[nodiscard]] EpochStats evaluate_loss(BeamModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg,
                                       const CameraConfig& cameras);

void write_trace_csv(const std::string& path, const TrainResult& result);

}  // namespace beamsem::nn
