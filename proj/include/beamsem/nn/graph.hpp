#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "beamsem/nn/tensor.hpp"

namespace beamsem::nn {

/// Trainable tensor. `grad` accumulates across backward passes until cleared.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor velocity;

  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), velocity(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node on a Graph tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape. Ops append nodes in evaluation order; backward() walks
/// them in reverse. A graph is meant for one forward/backward pass and is
/// single-threaded.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  /// Leaf holding a copy of `t`. If `requires_grad`, its gradient is
  /// available after backward().
  Var input(Tensor t, bool requires_grad = false);
  /// Leaf aliasing `p.value`; backward accumulates into `p.grad`.
  Var parameter(Parameter& p);

  /// Appends an op result. `parents` decide whether the node needs a gradient.
  Var emit(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);

  [[nodiscard]] const Tensor& value(Var v) const;
  [[nodiscard]] const Shape& shape(Var v) const { return value(v).shape(); }
  [[nodiscard]] bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient buffer of `v`, zero-initialised on first access.
  Tensor& grad(Var v);
  [[nodiscard]] const Tensor& grad(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one element.
  void backward(Var loss);

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* value_ref = nullptr;
    Tensor grad;
    Tensor* grad_ref = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Differentiable ops. Image tensors are (channels, rows, cols).

/// y = W x + b with W of shape (out, in); x is flattened.
Var dense(Graph& g, Var x, Var weight, Var bias);
/// Zero-padded ("same" for stride 1) square convolution; weight is
/// (out, in, k, k) with odd k, stride 1 or 2.
Var conv2d(Graph& g, Var x, Var weight, Var bias, int stride);
Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);
/// Softmax over all elements of x.
Var softmax(Graph& g, Var x);
/// Elementwise product. `b` may also be (1, rows, cols) and is then
/// broadcast over the channels of `a`.
Var multiply(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
/// Flattened concatenation.
Var concat(Graph& g, Var a, Var b);
Var reshape(Graph& g, Var x, Shape shape);
Var avg_pool(Graph& g, Var x, int factor);
Var upsample(Graph& g, Var x, int factor);

}  // namespace beamsem::nn
