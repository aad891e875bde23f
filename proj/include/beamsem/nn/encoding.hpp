#pragma once

#include <array>
#include <cstddef>

#include "beamsem/nn/tensor.hpp"
#include "beamsem/scene.hpp"

namespace beamsem::nn {

inline constexpr std::size_t kEncodingFrequencies = 5;
inline constexpr std::size_t kEncodingSize = 2 * kEncodingFrequencies;
inline constexpr std::size_t kLocationVectorSize = 2 * kEncodingSize + 3;

/// (sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^4 pi p), cos(2^4 pi p)).
[[nodiscard]] std::array<double, kEncodingSize> positional_encoding(double p);

/// (gamma(x / (length/2)), gamma(y / (width/2)), z, cos(yaw), sin(yaw)) for
/// an MS pose given relative to the BS.
struct LocationVector {
  std::array<double, kLocationVectorSize> values{};

  [[nodiscard]] Tensor tensor() const;
};

[[nodiscard]] LocationVector assemble_location_vector(double x, double y, double z, double yaw, const Area& area);

}  // namespace beamsem::nn
