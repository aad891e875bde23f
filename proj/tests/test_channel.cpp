#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "beamsem/channel.hpp"
#include "beamsem/error.hpp"

using namespace beamsem;

namespace {

constexpr double kPi = std::numbers::pi;

// Element (a, b) written out directly from the array response formula.
cplx element(std::size_t a, std::size_t b, std::size_t na, std::size_t nb, double theta, double phi) {
  const double phase = kPi * (static_cast<double>(a) * std::cos(theta) + static_cast<double>(b) * std::sin(theta) * std::sin(phi));
  return std::polar(1.0 / std::sqrt(static_cast<double>(na * nb)), phase);
}

PathComponent path(cplx gain, double aoa_el, double aoa_az, double aod_el, double aod_az) {
  PathComponent p;
  p.gain = gain;
  p.aoa_elevation = aoa_el;
  p.aoa_azimuth = aoa_az;
  p.aod_elevation = aod_el;
  p.aod_azimuth = aod_az;
  return p;
}

}  // namespace

TEST(SteeringVector, SingleElementIsOne) {
  const CVector v = steering_vector({1, 1}, 1.0, 0.3);
  ASSERT_EQ(v.size(), 1);
  EXPECT_NEAR(std::abs(v(0) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, VerticalPairAtBroadside) {
  const CVector v = steering_vector({2, 1}, kPi / 2, 0.0);
  ASSERT_EQ(v.size(), 2);
  EXPECT_NEAR(std::abs(v(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(1) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(SteeringVector, HorizontalPairAtEndfire) {
  const CVector v = steering_vector({1, 2}, kPi / 2, kPi / 2);
  EXPECT_NEAR(std::abs(v(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v(1) + 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(SteeringVector, MatchesElementFormulaWithAMajorOrdering) {
  const ArrayGeometry g{3, 5};
  const CVector v = steering_vector(g, 1.1, -0.7);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 5; ++b)
      EXPECT_NEAR(std::abs(v(static_cast<Eigen::Index>(a * 5 + b)) - element(a, b, 3, 5, 1.1, -0.7)), 0.0, 1e-14);
}

TEST(SteeringVector, UnitNormForRandomInputs) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  std::uniform_real_distribution<double> el(0.0, kPi), az(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const ArrayGeometry g{dim(gen), dim(gen)};
    EXPECT_NEAR(steering_vector(g, el(gen), az(gen)).norm(), 1.0, 1e-12);
  }
}

TEST(ChannelFromPaths, SingleElementSinglePath) {
  const std::vector<PathComponent> ps{path({1.0, 0.0}, 0.4, 0.1, 1.2, -0.3)};
  const ChannelMatrix h = channel_from_paths(ps, {1, 1}, {1, 1});
  ASSERT_EQ(h.rows(), 1);
  ASSERT_EQ(h.cols(), 1);
  EXPECT_NEAR(std::abs(h(0, 0) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(ChannelFromPaths, ShapeIsRxByTx) {
  const std::vector<PathComponent> ps{path({1.0, 0.0}, 0.4, 0.1, 1.2, -0.3)};
  const ChannelMatrix h = channel_from_paths(ps, {2, 3}, {4, 1});
  EXPECT_EQ(h.rows(), 6);
  EXPECT_EQ(h.cols(), 4);
}

TEST(ChannelFromPaths, AdditiveOverPathLists) {
  const PathComponent p1 = path({0.3, -0.2}, 1.2, 0.4, 1.7, -0.9);
  const PathComponent p2 = path({-0.1, 0.5}, 1.5, -1.1, 1.4, 0.2);
  const ArrayGeometry rx{2, 3}, tx{3, 2};
  const std::vector<PathComponent> a{p1}, b{p2}, both{p1, p2};
  const ChannelMatrix sum = channel_from_paths(a, rx, tx) + channel_from_paths(b, rx, tx);
  EXPECT_EQ(channel_from_paths(both, rx, tx), sum);
}

TEST(ChannelFromPaths, SinglePathFrobeniusNormIsGainMagnitude) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> el(0.0, kPi), az(-kPi, kPi), amp(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const cplx g{amp(gen), amp(gen)};
    const std::vector<PathComponent> ps{path(g, el(gen), az(gen), el(gen), az(gen))};
    // Independent oracle: |alpha| * |a_r| * |a_t| with both factors normed element by element.
    double nr = 0.0, nt = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      nr += std::norm(element(k / 2, k % 2, 2, 2, ps[0].aoa_elevation, ps[0].aoa_azimuth));
      nt += std::norm(element(k / 2, k % 2, 2, 2, ps[0].aod_elevation, ps[0].aod_azimuth));
    }
    EXPECT_NEAR(channel_from_paths(ps, {2, 2}, {2, 2}).norm(), std::abs(g) * std::sqrt(nr * nt), 1e-12);
  }
}

TEST(ChannelFromPaths, EmptyListIsNoPathsError) {
  const std::vector<PathComponent> none;
  EXPECT_THROW((void)channel_from_paths(none, {2, 2}, {2, 2}), NoPathsError);
}

TEST(ChannelFromPaths, PhaseRotationLeavesBeamformedPowerUnchanged) {
  const std::vector<PathComponent> ps{path({0.3, -0.2}, 1.2, 0.4, 1.7, -0.9), path({-0.1, 0.5}, 1.5, -1.1, 1.4, 0.2)};
  std::vector<PathComponent> rotated = ps;
  const cplx rot = std::polar(1.0, 0.77);
  for (auto& p : rotated) p.gain *= rot;
  const ArrayGeometry rx{2, 4}, tx{2, 4};
  const CVector w = steering_vector(rx, 1.3, 0.2);
  const CVector u = steering_vector(tx, 1.6, -0.5);
  const double before = std::norm(w.dot(channel_from_paths(ps, rx, tx) * u));
  const double after = std::norm(w.dot(channel_from_paths(rotated, rx, tx) * u));
  EXPECT_NEAR(before, after, 1e-12 * std::max(1.0, before));
}

TEST(RelativePowers, Examples) {
  std::vector<PathComponent> ps{path({1.0, 0.0}, 0, 0, 0, 0), path({0.0, 0.5}, 0, 0, 0, 0)};
  auto r = relative_powers(ps);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.25);

  ps = {path({-3.0, 0.0}, 0, 0, 0, 0)};
  r = relative_powers(ps);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);

  ps = {path({2.0, 0.0}, 0, 0, 0, 0), path({1.0, 0.0}, 0, 0, 0, 0), path({0.2, 0.0}, 0, 0, 0, 0)};
  r = relative_powers(ps);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.25);
  EXPECT_NEAR(r[2], 0.01, 1e-15);
}

TEST(RelativePowers, EmptyListIsNoPathsError) {
  const std::vector<PathComponent> none;
  EXPECT_THROW((void)relative_powers(none), NoPathsError);
}

TEST(WrapAngle, RangeIsHalfOpen) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 0.0);
}
