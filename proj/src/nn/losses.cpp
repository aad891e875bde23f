#include "beamsem/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamsem::nn {

namespace {

void check_heatmap_pair(const Tensor& pred, const Tensor& target, const char* who) {
  if (pred.shape() != target.shape()) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch " + shape_string(pred.shape()) + " vs " +
                                shape_string(target.shape()));
  }
  if (pred.rank() != 3 || pred.dim(0) % 2 != 0) {
    throw std::invalid_argument(std::string(who) + ": expected (2 * cameras, rows, cols), got " + shape_string(pred.shape()));
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }
bool clamped(double p) { return p < kProbEpsilon || p > 1.0 - kProbEpsilon; }

/// Loss and derivative for one distribution pixel.
void focal_term(double pred, double target, double& value, double& deriv) {
  const double p = clamp_prob(pred);
  if (target == 1.0) {
    const double q = 1.0 - p;
    value = -q * q * std::log(p);
    deriv = 2.0 * q * std::log(p) - q * q / p;
  } else {
    const double w = std::pow(1.0 - target, 4);
    const double l = std::log(1.0 - p);
    value = -w * p * p * l;
    deriv = -w * (2.0 * p * l - p * p / (1.0 - p));
  }
  if (clamped(pred)) deriv = 0.0;
}

}  // namespace

LossValue loss_distribution_grad(const Tensor& pred, const Tensor& target) {
  check_heatmap_pair(pred, target, "loss_distribution");
  LossValue out{0.0, Tensor(pred.shape())};
  const std::size_t half = pred.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double v = 0.0, d = 0.0;
    focal_term(pred[i], target[i], v, d);
    out.value += v;
    out.grad[i] = d;
  }
  return out;
}

double loss_distribution(const Tensor& pred, const Tensor& target) { return loss_distribution_grad(pred, target).value; }

LossValue loss_strength_grad(const Tensor& pred, const Tensor& target) {
  check_heatmap_pair(pred, target, "loss_strength");
  LossValue out{0.0, Tensor(pred.shape())};
  for (std::size_t i = pred.size() / 2; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    out.value += diff * diff;
    out.grad[i] = 2.0 * diff;
  }
  return out;
}

double loss_strength(const Tensor& pred, const Tensor& target) { return loss_strength_grad(pred, target).value; }

double loss_heatmap(const Tensor& pred, const Tensor& target) {
  return loss_distribution(pred, target) + loss_strength(pred, target);
}

std::vector<double> beam_target(std::size_t optimal_index, std::span<const double> gains, double beta) {
  if (optimal_index >= gains.size()) throw std::out_of_range("beam_target: optimal index outside the candidate set");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beam_target: beta must be in [0, 1]");
  double total = 0.0;
  for (const double gval : gains) {
    if (gval < 0.0) throw std::invalid_argument("beam_target: negative gain");
    total += gval;
  }
  if (!(total > 0.0)) throw std::invalid_argument("beam_target: candidate gains sum to zero");
  std::vector<double> target(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) target[i] = beta * gains[i] / total;
  target[optimal_index] += 1.0 - beta;
  return target;
}

LossValue loss_beam_grad(std::span<const double> probs, std::size_t optimal_index, std::span<const double> gains,
                         double beta) {
  if (probs.size() != gains.size()) throw std::invalid_argument("loss_beam: probability and gain sizes differ");
  const auto target = beam_target(optimal_index, gains, beta);
  LossValue out{0.0, Tensor({probs.size()})};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double q = clamp_prob(probs[i]);
    out.value -= target[i] * std::log(q);
    out.grad[i] = clamped(probs[i]) ? 0.0 : -target[i] / q;
  }
  return out;
}

double loss_beam(std::span<const double> probs, std::size_t optimal_index, std::span<const double> gains, double beta) {
  return loss_beam_grad(probs, optimal_index, gains, beta).value;
}

namespace {

Var scalar_loss(Graph& g, Var input, LossValue loss) {
  Tensor value({1}, {loss.value});
  return g.emit(std::move(value), {input}, [input, grad = std::move(loss.grad)](Graph& gr, std::size_t self) {
    const double up = gr.grad(Var{self})[0];
    Tensor& dx = gr.grad(input);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up * grad[i];
  });
}

}  // namespace

Var distribution_loss(Graph& g, Var pred, const Tensor& target) {
  return scalar_loss(g, pred, loss_distribution_grad(g.value(pred), target));
}

Var strength_loss(Graph& g, Var pred, const Tensor& target) {
  return scalar_loss(g, pred, loss_strength_grad(g.value(pred), target));
}

double loss_all(const Tensor& pred_heatmap, const Tensor& target_heatmap, std::span<const double> probs,
                std::size_t optimal_index, std::span<const double> gains, double beta) {
  return loss_beam(probs, optimal_index, gains, beta) + loss_heatmap(pred_heatmap, target_heatmap);
}

Var all_loss(Graph& g, Var pred_heatmap, const Tensor& target_heatmap, Var probs, std::size_t optimal_index,
             std::span<const double> gains, double beta) {
  return add(g, beam_loss(g, probs, optimal_index, gains, beta), heatmap_loss(g, pred_heatmap, target_heatmap));
}

Var heatmap_loss(Graph& g, Var pred, const Tensor& target) {
  return add(g, distribution_loss(g, pred, target), strength_loss(g, pred, target));
}

Var beam_loss(Graph& g, Var probs, std::size_t optimal_index, std::span<const double> gains, double beta) {
  return scalar_loss(g, probs, loss_beam_grad(g.value(probs).data(), optimal_index, gains, beta));
}

Var softmax_beam_loss(Graph& g, Var logits, std::size_t optimal_index, std::span<const double> gains, double beta) {
  const Tensor& z = g.value(logits);
  if (z.size() != gains.size()) throw std::invalid_argument("softmax_beam_loss: logit and gain sizes differ");
  const auto target = beam_target(optimal_index, gains, beta);
  const double mx = *std::max_element(z.values().begin(), z.values().end());
  std::vector<double> probs(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - mx);
    total += probs[i];
  }
  LossValue loss{0.0, Tensor({z.size()})};
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] /= total;
    loss.value -= target[i] * std::log(clamp_prob(probs[i]));
    loss.grad[i] = probs[i] - target[i];
  }
  return scalar_loss(g, logits, std::move(loss));
}

}  // namespace beamsem::nn
