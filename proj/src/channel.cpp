#include "beamsem/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beamsem/error.hpp"

namespace beamsem {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

CVector steering_vector(const ArrayGeometry& geom, double elevation, double azimuth) {
  if (!geom.valid()) throw std::invalid_argument("steering_vector: array geometry must be at least 1x1");
  const double vertical_phase = kPi * std::cos(elevation);
  const double horizontal_phase = kPi * std::sin(elevation) * std::sin(azimuth);
  const double scale = 1.0 / std::sqrt(static_cast<double>(geom.size()));

  CVector out(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t a = 0; a < geom.vertical; ++a) {
    for (std::size_t b = 0; b < geom.horizontal; ++b) {
      const double phase = static_cast<double>(a) * vertical_phase + static_cast<double>(b) * horizontal_phase;
      out(static_cast<Eigen::Index>(a * geom.horizontal + b)) = scale * std::polar(1.0, phase);
    }
  }
  return out;
}

ChannelMatrix channel_from_paths(std::span<const PathComponent> paths, const ArrayGeometry& rx,
                                 const ArrayGeometry& tx) {
  if (paths.empty()) throw NoPathsError("channel_from_paths");
  ChannelMatrix h = ChannelMatrix::Zero(static_cast<Eigen::Index>(rx.size()), static_cast<Eigen::Index>(tx.size()));
  for (const auto& p : paths) {
    const CVector ar = steering_vector(rx, p.aoa_elevation, p.aoa_azimuth);
    const CVector at = steering_vector(tx, p.aod_elevation, p.aod_azimuth);
    h.noalias() += (p.gain * ar) * at.adjoint();
  }
  return h;
}

std::vector<double> relative_powers(std::span<const PathComponent> paths) {
  if (paths.empty()) throw NoPathsError("relative_powers");
  double max_power = 0.0;
  for (const auto& p : paths) max_power = std::max(max_power, std::norm(p.gain));
  if (!(max_power > 0.0)) throw std::invalid_argument("relative_powers: all path gains are zero");
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(std::norm(p.gain) / max_power);
  return out;
}

}  // namespace beamsem
