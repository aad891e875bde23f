#include "beamsem/nn/encoding.hpp"

#include <cmath>
#include <numbers>

namespace beamsem::nn {

std::array<double, kEncodingSize> positional_encoding(double p) {
  std::array<double, kEncodingSize> out{};
  double freq = std::numbers::pi;
  for (std::size_t l = 0; l < kEncodingFrequencies; ++l) {
    out[2 * l] = std::sin(freq * p);
    out[2 * l + 1] = std::cos(freq * p);
    freq *= 2.0;
  }
  return out;
}

Tensor LocationVector::tensor() const { return Tensor({values.size()}, std::vector<double>(values.begin(), values.end())); }

LocationVector assemble_location_vector(double x, double y, double z, double yaw, const Area& area) {
  LocationVector lv;
  const auto gx = positional_encoding(x / (0.5 * area.length));
  const auto gy = positional_encoding(y / (0.5 * area.width));
  std::copy(gx.begin(), gx.end(), lv.values.begin());
  std::copy(gy.begin(), gy.end(), lv.values.begin() + kEncodingSize);
  lv.values[2 * kEncodingSize] = z;
  lv.values[2 * kEncodingSize + 1] = std::cos(yaw);
  lv.values[2 * kEncodingSize + 2] = std::sin(yaw);
  return lv;
}

}  // namespace beamsem::nn
