#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamsem::nn {

using Shape = std::vector<std::size_t>;

[[nodiscard]] inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

[[nodiscard]] std::string shape_string(const Shape& s);

/// Dense row-major array of doubles. Image-like tensors use (channel, row, col).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor of shape " + shape_string(shape_) + " given " + std::to_string(data_.size()) +
                                  " values");
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<double> data() { return data_; }
  [[nodiscard]] std::span<const double> data() const { return data_; }
  [[nodiscard]] std::vector<double>& values() { return data_; }
  [[nodiscard]] const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  /// (c, r, col) element of a rank-3 tensor.
  double& at(std::size_t c, std::size_t r, std::size_t col) { return data_[(c * shape_[1] + r) * shape_[2] + col]; }
  [[nodiscard]] double at(std::size_t c, std::size_t r, std::size_t col) const {
    return data_[(c * shape_[1] + r) * shape_[2] + col];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  /// Same data, new shape with equal element count.
  [[nodiscard]] Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace beamsem::nn
