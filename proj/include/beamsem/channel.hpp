#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace beamsem {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVector = Eigen::VectorXcd;

/// Complex N_M x N_B matrix, receive elements on rows.
using ChannelMatrix = Eigen::MatrixXcd;

/// Uniform planar array with `vertical` x `horizontal` half-wavelength spaced
/// elements. Flat element index is vertical-major: (a, b) -> a * horizontal + b.
struct ArrayGeometry {
  std::size_t vertical = 1;
  std::size_t horizontal = 1;

  [[nodiscard]] std::size_t size() const { return vertical * horizontal; }
  [[nodiscard]] bool valid() const { return vertical >= 1 && horizontal >= 1; }
  bool operator==(const ArrayGeometry&) const = default;
};

/// One multipath arrival. Angles use the zenith-referenced convention:
/// elevation in [0, pi] measured from +z, azimuth in (-pi, pi] from +x
/// counter-clockwise. Departure angles are in the BS frame, arrival angles in
/// the MS (vehicle) frame.
struct PathComponent {
  cplx gain{1.0, 0.0};
  double aoa_elevation = 0.0;
  double aoa_azimuth = 0.0;
  double aod_elevation = 0.0;
  double aod_azimuth = 0.0;
  double path_length = 1.0;
  int bounce_count = 0;
  Vec3 last_hop_point = Vec3::Zero();
  bool is_los = true;
};

/// Unit-norm UPA response: element (a, b) is
/// exp(j*pi*(a*cos(elevation) + b*sin(elevation)*sin(azimuth))) / sqrt(N).
[[nodiscard]] CVector steering_vector(const ArrayGeometry& geom, double elevation, double azimuth);

/// Sum over paths of gain * a_r(aoa) * a_t(aod)^H. Paths are accumulated in
/// list order, so the result is additive over concatenated path lists.
/// Throws NoPathsError on an empty list.
[[nodiscard]] ChannelMatrix channel_from_paths(std::span<const PathComponent> paths,
                                               const ArrayGeometry& rx, const ArrayGeometry& tx);

/// |gain_p|^2 / max_q |gain_q|^2 for every path.
[[nodiscard]] std::vector<double> relative_powers(std::span<const PathComponent> paths);

/// Wraps an angle into (-pi, pi].
[[nodiscard]] double wrap_angle(double angle);

}  // namespace beamsem
