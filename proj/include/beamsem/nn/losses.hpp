#pragma once

#include <cstddef>
#include <span>

#include "beamsem/nn/graph.hpp"
#include "beamsem/nn/tensor.hpp"

namespace beamsem::nn {

/// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before any log.
inline constexpr double kProbEpsilon = 1e-7;

struct LossValue {
  double value = 0.0;
  Tensor grad;  ///< d(value)/d(input), same shape as the differentiated input
};

// Heatmap tensors are (2 * cameras, rows, cols): distribution channels first,
// then strength channels.

/// Focal loss over the distribution channels:
/// -sum{ (1-p)^2 log p            where target == 1
///       (1-t)^4 p^2 log(1-p)     otherwise }.
[[nodiscard]] double loss_distribution(const Tensor& pred, const Tensor& target);
[[nodiscard]] LossValue loss_distribution_grad(const Tensor& pred, const Tensor& target);

/// Sum of squared errors over the strength channels.
[[nodiscard]] double loss_strength(const Tensor& pred, const Tensor& target);
[[nodiscard]] LossValue loss_strength_grad(const Tensor& pred, const Tensor& target);

/// loss_distribution + loss_strength.
[[nodiscard]] double loss_heatmap(const Tensor& pred, const Tensor& target);

/// Soft target used by the beam loss: (1 - beta) one-hot(optimal) + beta * gains / sum(gains).
/// Throws std::invalid_argument if the gains sum to zero.
[[nodiscard]] std::vector<double> beam_target(std::size_t optimal_index, std::span<const double> gains, double beta);

/// -(1-beta) sum y* log(q) - beta sum ybar log(q) over predicted probabilities q.
[[nodiscard]] double loss_beam(std::span<const double> probs, std::size_t optimal_index, std::span<const double> gains,
                               double beta);
[[nodiscard]] LossValue loss_beam_grad(std::span<const double> probs, std::size_t optimal_index,
                                       std::span<const double> gains, double beta);

// Graph ops. Targets are constants.
/// L_pd + L_hm, the joint two-stage objective.
[[nodiscard]] double loss_all(const Tensor& pred_heatmap, const Tensor& target_heatmap, std::span<const double> probs,
                              std::size_t optimal_index, std::span<const double> gains, double beta);

Var distribution_loss(Graph& g, Var pred, const Tensor& target);
Var strength_loss(Graph& g, Var pred, const Tensor& target);
Var heatmap_loss(Graph& g, Var pred, const Tensor& target);
/// Beam loss on an already-normalised probability vector.
Var beam_loss(Graph& g, Var probs, std::size_t optimal_index, std::span<const double> gains, double beta);
/// Softmax followed by the beam loss, fused. The value equals
/// beam_loss(softmax(logits)); the gradient is softmax(logits) - target,
/// i.e. the exact gradient without the clamp, so saturated wrong answers
/// still receive a signal.
Var softmax_beam_loss(Graph& g, Var logits, std::size_t optimal_index, std::span<const double> gains, double beta);
Var all_loss(Graph& g, Var pred_heatmap, const Tensor& target_heatmap, Var probs, std::size_t optimal_index,
             std::span<const double> gains, double beta);

}  // namespace beamsem::nn
