#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "beamsem/channel.hpp"
#include "beamsem/codebook.hpp"
#include "beamsem/nn/models.hpp"
#include "beamsem/nn/train.hpp"
#include "beamsem/raytrace.hpp"
#include "beamsem/scene.hpp"
#include "beamsem/semantics.hpp"

namespace beamsem::harness {

/// Flat key=value text. Blank lines and lines starting with '#' are ignored;
/// whitespace around keys and values is trimmed. Keys are kept sorted so the
/// rendered form is canonical.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& origin = "config");
  static KeyValues load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::string& get(const std::string& key) const;
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
  [[nodiscard]] std::string render() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Shortest decimal string that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

enum class ThroughputMode {
  linear,      ///< mean over samples of achieved / optimal gain
  linear_sum,  ///< sum of achieved gains over sum of optimal gains
  log2,        ///< mean over samples of log2(1 + y / noise) ratios
};

/// Everything needed to generate, train and evaluate, with the defaults used
/// throughout. Built from a KeyValues file; unknown keys are rejected.
struct ExperimentConfig {
  SceneSamplerConfig sampler = default_sampler_config();
  int sequence_length = 0;  ///< samples per sequence; 0 means a full crossing of the area

  RayTraceConfig trace;

  ArrayGeometry tx_array{8, 64};
  ArrayGeometry rx_array{8, 64};
  int tx_codebook = 64;
  int rx_codebook = 64;
  double tx_elevation_deg = 92.0;
  double rx_elevation_deg = 88.0;
  int min_count = 3;

  CameraConfig cameras = default_camera_config();
  double p_th_db = -10.0;

  nn::TrainConfig train;
  int pool = 4;
  int conv_channels = 16;
  int hidden = 64;
  int stage1_channels = 8;

  ThroughputMode throughput = ThroughputMode::linear;
  double noise_power = 1e-6;
  int kmax = 10;

  static ExperimentConfig from(const KeyValues& kv);
  [[nodiscard]] KeyValues to_key_values() const;
  void validate() const;

  [[nodiscard]] nn::ModelSpec model_spec(nn::ModelKind kind, std::size_t outputs, std::uint64_t seed) const;
};

struct Codebooks {
  Codebook tx;
  Codebook rx;
};
[[nodiscard]] Codebooks make_codebooks(const ExperimentConfig& cfg);

[[nodiscard]] const char* to_string(ThroughputMode m);
[[nodiscard]] ThroughputMode throughput_mode_from_string(const std::string& s);

}  // namespace beamsem::harness
