#pragma once

#include <span>
#include <vector>

#include "beamsem/harness/config.hpp"
#include "beamsem/harness/dataset.hpp"
#include "beamsem/harness/metrics.hpp"
#include "beamsem/nn/models.hpp"
#include "beamsem/nn/train.hpp"

namespace beamsem::harness {

/// Builds a model of `kind` over `candidates` and trains it with cfg.train.
[[nodiscard]] nn::BeamModel train_model(nn::ModelKind kind, std::span<const nn::TrainingSample> train_set,
                                        const CandidateSet& candidates, const ExperimentConfig& cfg,
                                        nn::TrainResult* trace = nullptr,
                                        std::span<const nn::TrainingSample> validation = {});

/// Softmax scores for every sample.
[[nodiscard]] std::vector<std::vector<double>> predict_all(nn::BeamModel& model, std::span<const nn::TrainingSample> samples,
                                                           const CameraConfig& cameras);

/// A(K)/T(K) of a trained model; joint models also get a precision/recall
/// curve of their predicted heatmaps at a 3-pixel match radius.
[[nodiscard]] MetricsReport evaluate_model(nn::BeamModel& model, std::span<const nn::TrainingSample> samples,
                                           const ExperimentConfig& cfg);

/// Location-only model trained on `train_set` and evaluated on `test_set`.
[[nodiscard]] MetricsReport location_baseline(std::span<const nn::TrainingSample> train_set,
                                              std::span<const nn::TrainingSample> test_set,
                                              const CandidateSet& candidates, const ExperimentConfig& cfg);

/// Top-1 accuracy of picking a candidate uniformly at random.
[[nodiscard]] double uniform_random_top1(const CandidateSet& candidates);

struct SweepRow {
  double p_th_db = 0.0;
  double a1 = 0.0;
  double t1 = 0.0;
  double n_e = 0.0;  ///< mean effective scatterers per camera over all labelled records
};

struct SweepOptions {
  bool retrain = true;  ///< false skips training and reports only N_E
};

/// Regenerates scatterers at every threshold (dB, strictly descending),
/// retrains the semantic model on the training split and evaluates it on the
/// test split.
[[nodiscard]] std::vector<SweepRow> sweep_threshold(const Dataset& ds, const Split& split, std::span<const double> thresholds,
                                                    const SweepOptions& opts = {});

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

}  // namespace beamsem::harness
