#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beamsem/codebook.hpp"
#include "beamsem/nn/graph.hpp"

namespace beamsem::nn {

enum class ModelKind {
  location = 0,  ///< dense branch on the location vector only
  semantic = 1,  ///< stage 2: semantic heatmap + location vector
  joint = 2,     ///< stage 1 (pseudo image + location -> heatmap) feeding stage 2
};

[[nodiscard]] const char* to_string(ModelKind k);
[[nodiscard]] ModelKind model_kind_from_string(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::semantic;
  std::size_t cameras = 4;
  std::size_t heatmap_rows = 48;
  std::size_t heatmap_cols = 128;
  int pool = 4;                     ///< fixed average pooling applied to the stage-2 heatmap input
  std::size_t conv_channels = 16;   ///< stage-2 convolution width
  std::size_t hidden = 64;          ///< dense width
  std::size_t stage1_channels = 8;  ///< stage-1 convolution width
  std::size_t outputs = 1;          ///< softmax size, i.e. number of candidate pairs
  std::uint64_t seed = 1;
};

struct ModelInput {
  const Tensor* location = nullptr;  ///< (23)
  const Tensor* heatmap = nullptr;   ///< (2 * cameras, rows, cols), semantic models
  const Tensor* image = nullptr;     ///< (cameras, rows, cols), joint models
};

struct ModelOutput {
  Var logits;
  std::optional<Var> heatmap;  ///< predicted heatmap, joint models only
};

/// Small convolutional / dense beam predictor. Parameters are created and
/// initialised deterministically from spec.seed in the constructor and never
/// reallocated afterwards.
class BeamModel {
 public:
  explicit BeamModel(ModelSpec spec);

  ModelOutput forward(Graph& g, const ModelInput& in);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] std::vector<Parameter>& parameters() { return params_; }
  [[nodiscard]] const std::vector<Parameter>& parameters() const { return params_; }
  [[nodiscard]] Parameter& parameter(const std::string& name);

  /// Candidate beam pairs the softmax outputs index into.
  CandidateSet candidates;

 private:
  Parameter& add(const std::string& name, Shape shape, double bound, double bias_fill = 0.0);
  Var p(Graph& g, const std::string& name);
  Var location_branch(Graph& g, const ModelInput& in);
  Var heatmap_branch(Graph& g, Var heatmap);
  Var stage1(Graph& g, const ModelInput& in);

  ModelSpec spec_;
  std::vector<Parameter> params_;
};

}  // namespace beamsem::nn
