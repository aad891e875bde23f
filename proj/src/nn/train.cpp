#include "beamsem/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "beamsem/nn/losses.hpp"
#include "beamsem/rng.hpp"

namespace beamsem::nn {

void TrainConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in [0, 1]");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (heatmap_noise < 0.0) throw std::invalid_argument("heatmap noise must be >= 0");
}

PreparedInput prepare_input(const BeamModel& model, const TrainingSample& sample, const CameraConfig& cameras,
                            double noise, std::uint64_t noise_seed, const CorruptionConfig& corruption) {
  PreparedInput in;
  const ModelKind kind = model.spec().kind;
  if (kind == ModelKind::location) return in;
  SemanticHeatmap hm = rasterize_heatmaps(sample.scatterers, cameras);
  if (kind == ModelKind::semantic) {
    if (noise > 0.0) hm = corrupt_heatmaps(hm, noise, noise_seed, cameras, corruption);
    in.heatmap = heatmap_tensor(hm);
  } else {
    if (!sample.scene) throw std::invalid_argument("joint model needs the scene of every sample");
    in.image = rasterize_pseudo_image(*sample.scene, cameras);
    in.target_heatmap = heatmap_tensor(hm);
  }
  return in;
}

namespace {

struct StepResult {
  double loss = 0.0;
  bool correct = false;
};

StepResult run_sample(BeamModel& model, const TrainingSample& s, const PreparedInput& prepared, double beta,
                      bool backward) {
  Graph g;
  ModelInput in;
  in.location = &s.location;
  if (!prepared.heatmap.empty()) in.heatmap = &prepared.heatmap;
  if (!prepared.image.empty()) in.image = &prepared.image;
  const ModelOutput out = model.forward(g, in);
  if (s.gains.size() != model.spec().outputs) {
    throw std::invalid_argument("sample has " + std::to_string(s.gains.size()) + " candidate gains, model outputs " +
                                std::to_string(model.spec().outputs));
  }
  Var loss = softmax_beam_loss(g, out.logits, s.label, s.gains, beta);
  if (out.heatmap) loss = add(g, loss, heatmap_loss(g, *out.heatmap, prepared.target_heatmap));
  if (backward) g.backward(loss);
  const auto logits = g.value(out.logits).data();
  const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  return {g.value(loss)[0], best == s.label};
}

void sgd_step(BeamModel& model, const TrainConfig& cfg, double lr, std::size_t batch) {
  const double scale = 1.0 / static_cast<double>(batch);
  double norm2 = 0.0;
  for (auto& prm : model.parameters()) {
    for (auto& gv : prm.grad.values()) {
      gv *= scale;
      norm2 += gv * gv;
    }
  }
  double clip = 1.0;
  if (cfg.grad_clip > 0.0 && std::sqrt(norm2) > cfg.grad_clip) clip = cfg.grad_clip / std::sqrt(norm2);
  for (auto& prm : model.parameters()) {
    for (std::size_t i = 0; i < prm.value.size(); ++i) {
      prm.velocity[i] = cfg.momentum * prm.velocity[i] - lr * clip * prm.grad[i];
      prm.value[i] += prm.velocity[i];
    }
    prm.zero_grad();
  }
}

}  // namespace

TrainResult train(BeamModel& model, std::span<const TrainingSample> train_set, const TrainConfig& cfg,
                  const CameraConfig& cameras, std::span<const TrainingSample> validation) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  for (auto& prm : model.parameters()) {
    prm.zero_grad();
    prm.velocity.fill(0.0);
  }

  TrainResult result;
  Rng order_rng(stream_key(cfg.seed, 0x5eed));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = cfg.learning_rate;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t in_batch = 0;
    for (std::size_t n = 0; n < order.size(); ++n) {
      const TrainingSample& s = train_set[order[n]];
      const std::uint64_t noise_seed = stream_key(cfg.seed, static_cast<std::uint64_t>(epoch), s.key);
      const PreparedInput prepared = prepare_input(model, s, cameras, cfg.heatmap_noise, noise_seed, cfg.corruption);
      const StepResult r = run_sample(model, s, prepared, cfg.beta, true);
      loss_sum += r.loss;
      correct += r.correct ? 1 : 0;
      if (++in_batch == cfg.batch_size || n + 1 == order.size()) {
        sgd_step(model, cfg, lr, in_batch);
        in_batch = 0;
      }
    }
    const double mean_loss = loss_sum / static_cast<double>(train_set.size());
    result.trace.push_back({epoch, "train", mean_loss, static_cast<double>(correct) / static_cast<double>(train_set.size())});
    if (!validation.empty()) {
      EpochStats v = evaluate_loss(model, validation, cfg, cameras);
      v.epoch = epoch;
      result.trace.push_back(v);
    }
    if (cfg.halve_on_plateau && epoch > 1 && mean_loss >= best_loss) lr *= 0.5;
    best_loss = std::min(best_loss, mean_loss);
  }
  return result;
}

EpochStats evaluate_loss(BeamModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg,
                         const CameraConfig& cameras) {
  EpochStats st;
  st.split = "test";
  if (samples.empty()) return st;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const StepResult r = run_sample(model, s, prepare_input(model, s, cameras), cfg.beta, false);
    st.loss += r.loss;
    correct += r.correct ? 1 : 0;
  }
  st.loss /= static_cast<double>(samples.size());
  st.top1 = static_cast<double>(correct) / static_cast<double>(samples.size());
  return st;
}

std::vector<double> predict(BeamModel& model, const TrainingSample& sample, const CameraConfig& cameras) {
  const PreparedInput prepared = prepare_input(model, sample, cameras);
  Graph g;
  ModelInput in;
  in.location = &sample.location;
  if (!prepared.heatmap.empty()) in.heatmap = &prepared.heatmap;
  if (!prepared.image.empty()) in.image = &prepared.image;
  const ModelOutput out = model.forward(g, in);
  return g.value(softmax(g, out.logits)).values();
}

void write_trace_csv(const std::string& path, const TrainResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,split,loss,top1\n";
  out.precision(17);
  for (const auto& e : result.trace) out << e.epoch << ',' << e.split << ',' << e.loss << ',' << e.top1 << '\n';
}

}  // namespace beamsem::nn
