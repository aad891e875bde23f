#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "beamsem/harness/config.hpp"
#include "beamsem/nn/train.hpp"

namespace beamsem::harness {

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Index K-1 of each vector holds the value for top-K selection. Strata with
/// no samples hold NaN.
struct MetricsReport {
  std::vector<double> a;
  std::vector<double> t;
  std::vector<double> a_los;
  std::vector<double> t_los;
  std::vector<double> a_nlos;
  std::vector<double> t_nlos;
  std::size_t samples = 0;
  std::size_t los_samples = 0;
  std::size_t nlos_samples = 0;
  double mean_scatterers = 0.0;  ///< N_E over the evaluated samples
  std::vector<PrPoint> pr_curve;

  [[nodiscard]] std::size_t kmax() const { return a.size(); }
};

/// Candidate indices ordered by descending score, ties to the lower index.
[[nodiscard]] std::vector<std::size_t> rank_candidates(std::span<const double> scores);

/// A(K) and T(K) for K = 1..kmax given one score vector per sample.
/// Throws std::invalid_argument on an empty sample set or mismatched sizes.
[[nodiscard]] MetricsReport evaluate_scores(std::span<const nn::TrainingSample> samples,
                                            std::span<const std::vector<double>> scores, const CandidateSet& candidates,
                                            int kmax, ThroughputMode mode = ThroughputMode::linear,
                                            double noise_power = 1.0, std::size_t cameras = 4);

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
[[nodiscard]] MetricsReport read_metrics_csv(const std::filesystem::path& path);
void write_pr_csv(std::span<const PrPoint> curve, const std::filesystem::path& path);

/// Element-wise equality treating NaN == NaN.
[[nodiscard]] bool same_table(const MetricsReport& a, const MetricsReport& b);

}  // namespace beamsem::harness
