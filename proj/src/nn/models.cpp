#include "beamsem/nn/models.hpp"

#include <cmath>
#include <stdexcept>

#include "beamsem/nn/encoding.hpp"
#include "beamsem/rng.hpp"

namespace beamsem::nn {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::location: return "location";
    case ModelKind::semantic: return "semantic";
    case ModelKind::joint: return "joint";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "location") return ModelKind::location;
  if (name == "semantic") return ModelKind::semantic;
  if (name == "joint") return ModelKind::joint;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

namespace {

std::size_t half_up(std::size_t n) { return (n + 1) / 2; }

}  // namespace

BeamModel::BeamModel(ModelSpec spec) : spec_(spec) {
  if (spec_.outputs == 0) throw std::invalid_argument("model needs at least one output");
  const std::size_t h = spec_.hidden;
  const std::size_t loc = kLocationVectorSize;
  const auto he = [](std::size_t fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); };
  params_.reserve(32);

  if (spec_.kind == ModelKind::joint) {
    const std::size_t k1 = spec_.stage1_channels;
    const std::size_t fr = half_up(spec_.heatmap_rows);
    const std::size_t fc = half_up(spec_.heatmap_cols);
    if (2 * fr != spec_.heatmap_rows || 2 * fc != spec_.heatmap_cols) {
      throw std::invalid_argument("joint model needs even heatmap dimensions");
    }
    add("s1.conv1.w", {k1, spec_.cameras, 3, 3}, he(spec_.cameras * 9));
    add("s1.conv1.b", {k1}, 0.0);
    add("s1.conv2.w", {k1, k1, 3, 3}, he(k1 * 9));
    add("s1.conv2.b", {k1}, 0.0);
    add("s1.loc1.w", {h, loc}, he(loc));
    add("s1.loc1.b", {h}, 0.0);
    add("s1.loc2.w", {fr * fc, h}, std::sqrt(1.0 / static_cast<double>(h)));
    add("s1.loc2.b", {fr * fc}, 0.0);
    add("s1.head.w", {2 * spec_.cameras, k1, 3, 3}, std::sqrt(1.0 / static_cast<double>(k1 * 9)));
    // Start the distribution channels near zero so the sparse focal loss
    // does not dominate the first updates.
    Parameter& head_b = add("s1.head.b", {2 * spec_.cameras}, 0.0);
    for (std::size_t c = 0; c < spec_.cameras; ++c) head_b.value[c] = -2.19;
  }

  if (spec_.kind != ModelKind::location) {
    const std::size_t in_c = 2 * spec_.cameras;
    const std::size_t k = spec_.conv_channels;
    const auto pool = static_cast<std::size_t>(spec_.pool);
    if (spec_.pool < 1 || spec_.heatmap_rows % pool != 0 || spec_.heatmap_cols % pool != 0) {
      throw std::invalid_argument("pool factor must divide the heatmap size");
    }
    const std::size_t rows = half_up(half_up(spec_.heatmap_rows / pool));
    const std::size_t cols = half_up(half_up(spec_.heatmap_cols / pool));
    add("hm.conv1.w", {k, in_c, 3, 3}, he(in_c * 9));
    add("hm.conv1.b", {k}, 0.0);
    add("hm.conv2.w", {k, k, 3, 3}, he(k * 9));
    add("hm.conv2.b", {k}, 0.0);
    add("hm.conv3.w", {k, k, 3, 3}, he(k * 9));
    add("hm.conv3.b", {k}, 0.0);
    add("hm.fc.w", {h, k * rows * cols}, he(k * rows * cols));
    add("hm.fc.b", {h}, 0.0);
  }

  add("loc.fc1.w", {h, loc}, he(loc));
  add("loc.fc1.b", {h}, 0.0);
  add("loc.fc2.w", {h, h}, he(h));
  add("loc.fc2.b", {h}, 0.0);
  const std::size_t merged = spec_.kind == ModelKind::location ? h : 2 * h;
  add("head.fc1.w", {h, merged}, he(merged));
  add("head.fc1.b", {h}, 0.0);
  add("head.fc2.w", {spec_.outputs, h}, std::sqrt(1.0 / static_cast<double>(h)));
  add("head.fc2.b", {spec_.outputs}, 0.0);
}

Parameter& BeamModel::add(const std::string& name, Shape shape, double bound, double bias_fill) {
  if (params_.size() == params_.capacity()) throw std::logic_error("BeamModel parameter storage would reallocate");
  Tensor t(std::move(shape), bias_fill);
  if (bound > 0.0) {
    Rng rng(stream_key(spec_.seed, params_.size(), 0x9a7a));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  }
  params_.emplace_back(name, std::move(t));
  return params_.back();
}

Parameter& BeamModel::parameter(const std::string& name) {
  for (auto& prm : params_)
    if (prm.name == name) return prm;
  throw std::out_of_range("no parameter named '" + name + "'");
}

Var BeamModel::p(Graph& g, const std::string& name) { return g.parameter(parameter(name)); }

Var BeamModel::location_branch(Graph& g, const ModelInput& in) {
  if (in.location == nullptr || in.location->size() != kLocationVectorSize) {
    throw std::invalid_argument("model input needs a 23-element location vector");
  }
  Var x = g.input(*in.location);
  x = relu(g, dense(g, x, p(g, "loc.fc1.w"), p(g, "loc.fc1.b")));
  return relu(g, dense(g, x, p(g, "loc.fc2.w"), p(g, "loc.fc2.b")));
}

Var BeamModel::heatmap_branch(Graph& g, Var heatmap) {
  Var x = avg_pool(g, heatmap, spec_.pool);
  x = relu(g, conv2d(g, x, p(g, "hm.conv1.w"), p(g, "hm.conv1.b"), 2));
  x = relu(g, conv2d(g, x, p(g, "hm.conv2.w"), p(g, "hm.conv2.b"), 2));
  x = relu(g, conv2d(g, x, p(g, "hm.conv3.w"), p(g, "hm.conv3.b"), 1));
  return relu(g, dense(g, x, p(g, "hm.fc.w"), p(g, "hm.fc.b")));
}

Var BeamModel::stage1(Graph& g, const ModelInput& in) {
  if (in.image == nullptr) throw std::invalid_argument("joint model input needs a pseudo image");
  const Shape want{spec_.cameras, spec_.heatmap_rows, spec_.heatmap_cols};
  if (in.image->shape() != want) {
    throw std::invalid_argument("pseudo image has shape " + shape_string(in.image->shape()) + ", expected " + shape_string(want));
  }
  Var img = g.input(*in.image);
  img = relu(g, conv2d(g, img, p(g, "s1.conv1.w"), p(g, "s1.conv1.b"), 2));
  img = relu(g, conv2d(g, img, p(g, "s1.conv2.w"), p(g, "s1.conv2.b"), 1));

  Var loc = g.input(*in.location);
  loc = relu(g, dense(g, loc, p(g, "s1.loc1.w"), p(g, "s1.loc1.b")));
  loc = sigmoid(g, dense(g, loc, p(g, "s1.loc2.w"), p(g, "s1.loc2.b")));
  loc = reshape(g, loc, {1, spec_.heatmap_rows / 2, spec_.heatmap_cols / 2});

  Var fused = upsample(g, multiply(g, img, loc), 2);
  return sigmoid(g, conv2d(g, fused, p(g, "s1.head.w"), p(g, "s1.head.b"), 1));
}

ModelOutput BeamModel::forward(Graph& g, const ModelInput& in) {
  ModelOutput out;
  Var features = location_branch(g, in);
  if (spec_.kind == ModelKind::semantic) {
    if (in.heatmap == nullptr) throw std::invalid_argument("semantic model input needs a heatmap");
    const Shape want{2 * spec_.cameras, spec_.heatmap_rows, spec_.heatmap_cols};
    if (in.heatmap->shape() != want) {
      throw std::invalid_argument("heatmap has shape " + shape_string(in.heatmap->shape()) + ", expected " + shape_string(want));
    }
    features = concat(g, heatmap_branch(g, g.input(*in.heatmap)), features);
  } else if (spec_.kind == ModelKind::joint) {
    const Var predicted = stage1(g, in);
    out.heatmap = predicted;
    features = concat(g, heatmap_branch(g, predicted), features);
  }
  Var x = relu(g, dense(g, features, p(g, "head.fc1.w"), p(g, "head.fc1.b")));
  out.logits = dense(g, x, p(g, "head.fc2.w"), p(g, "head.fc2.b"));
  return out;
}

}  // namespace beamsem::nn
