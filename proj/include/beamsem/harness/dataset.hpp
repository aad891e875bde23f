#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamsem/harness/config.hpp"
#include "beamsem/nn/train.hpp"

namespace beamsem::harness {

/// One generated scene. Outage records (no propagation path) keep their pose
/// but carry no label.
struct DatasetRecord {
  std::int64_t sequence_id = 0;
  std::int64_t time_index = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
  bool is_los = false;
  bool outage = false;
  std::vector<PathComponent> paths;
  std::optional<BeamPair> optimal;
  double optimal_gain = 0.0;
  std::vector<EffectiveScatterer> scatterers;
  std::vector<Cuboid> vehicles;
  int ms_vehicle = -1;
};

struct Dataset {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::size_t sequences = 0;
  std::vector<DatasetRecord> records;
};

/// Builds a record from a traced scene: paths, gains over both codebooks,
/// the optimal pair and the effective scatterers at cfg.p_th_db.
[[nodiscard]] DatasetRecord make_record(const Scene& scene, const ExperimentConfig& cfg, const Codebooks& books);

/// Samples `sequences` independent sequences (stream keyed by seed and
/// sequence id) and runs make_record on every scene. Work is spread over
/// `threads` workers (0 = hardware concurrency); output order is fixed.
[[nodiscard]] Dataset generate_dataset(const ExperimentConfig& cfg, std::size_t sequences, std::uint64_t seed,
                                       unsigned threads = 0);

/// Scene a record was generated from (vehicles from the record, static walls
/// from the config).
[[nodiscard]] Scene record_scene(const DatasetRecord& rec, const ExperimentConfig& cfg);

/// Effective scatterers of a record at an arbitrary threshold.
[[nodiscard]] std::vector<EffectiveScatterer> record_scatterers(const DatasetRecord& rec, const ExperimentConfig& cfg,
                                                                double p_th_db);

[[nodiscard]] std::string record_to_json(const DatasetRecord& rec);
[[nodiscard]] DatasetRecord record_from_json(const std::string& line);

/// Writes manifest.txt and records.jsonl under `dir` (created if missing).
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Throws DataError on missing files or malformed records.
[[nodiscard]] Dataset read_dataset(const std::filesystem::path& dir);

struct Split {
  std::vector<std::int64_t> train;  ///< sequence ids, ascending
  std::vector<std::int64_t> test;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Sequence-disjoint split: round(fraction * n) sequences (at least one on
/// each side) go to training. Throws std::invalid_argument for fewer than two
/// sequences or a fraction outside (0, 1).
[[nodiscard]] Split split_by_sequence(std::span<const DatasetRecord> records, double train_fraction, std::uint64_t seed);

void write_split(const Split& split, const std::filesystem::path& path);
[[nodiscard]] Split read_split(const std::filesystem::path& path);

/// Indices of non-outage records whose sequence is in `ids`.
[[nodiscard]] std::vector<std::size_t> select_records(std::span<const DatasetRecord> records,
                                                      std::span<const std::int64_t> ids);

/// Candidate set from the optimal pairs of the selected records.
[[nodiscard]] CandidateSet candidates_from(std::span<const DatasetRecord> records, std::span<const std::size_t> indices,
                                           int min_count);

struct SampleOptions {
  std::optional<double> p_th_db;  ///< regenerate scatterers at this threshold
  bool with_scene = false;        ///< keep the scene for pseudo-image rendering
};

/// Training / evaluation samples for the selected records. Candidate gains
/// are recomputed from the stored paths.
[[nodiscard]] std::vector<nn::TrainingSample> build_samples(std::span<const DatasetRecord> records,
                                                            std::span<const std::size_t> indices,
                                                            const ExperimentConfig& cfg, const CandidateSet& candidates,
                                                            const SampleOptions& opts = {});

}  // namespace beamsem::harness
