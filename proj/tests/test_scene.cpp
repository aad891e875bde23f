#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "beamsem/scene.hpp"

using namespace beamsem;

namespace {

SceneSamplerConfig empty_road() {
  SceneSamplerConfig cfg = default_sampler_config();
  cfg.min_vehicles_per_lane = 0;
  cfg.max_vehicles_per_lane = 0;
  return cfg;
}

double ms_lane_speed(const SceneSamplerConfig& cfg, const Scene& s) {
  for (const auto& lane : cfg.lanes)
    if (std::abs(lane.offset - s.ms_position.y()) < 1e-12) return lane.speed;
  return -1.0;
}

}  // namespace

TEST(Material, RoundTrip) {
  EXPECT_EQ(material_from_string(to_string(Material::metal)), Material::metal);
  EXPECT_EQ(material_from_string(to_string(Material::concrete)), Material::concrete);
  EXPECT_THROW((void)material_from_string("wood"), std::invalid_argument);
}

TEST(Cuboid, LocalFrameAndContains) {
  Cuboid c;
  c.center = {10.0, 2.0, 1.0};
  c.half_extents = {2.0, 1.0, 1.0};
  c.yaw = std::numbers::pi / 2;
  const Vec3 local = c.to_local({10.0, 3.5, 1.0});
  EXPECT_NEAR(local.x(), 1.5, 1e-12);
  EXPECT_NEAR(local.y(), 0.0, 1e-12);
  EXPECT_TRUE(c.contains({10.0, 3.5, 1.0}));
  EXPECT_FALSE(c.contains({11.5, 2.0, 1.0}));
  const Vec3 d = c.to_world_direction({1.0, 0.0, 0.0});
  EXPECT_NEAR(d.x(), 0.0, 1e-12);
  EXPECT_NEAR(d.y(), 1.0, 1e-12);
}

TEST(Sampler, DefaultsMatchScenario) {
  const auto cfg = default_sampler_config();
  EXPECT_EQ(cfg.vehicle_types.size(), 5u);
  EXPECT_DOUBLE_EQ(cfg.area.width, 48.0);
  EXPECT_DOUBLE_EQ(cfg.area.length, 192.0);
  EXPECT_DOUBLE_EQ(cfg.time_step, 0.5);
  EXPECT_DOUBLE_EQ(cfg.bs_height, 3.0);
}

TEST(Sampler, SingleStepEmptyRoadHoldsOnlyTheMs) {
  const auto scenes = sample_sequence(empty_road(), 1, 7);
  ASSERT_EQ(scenes.size(), 1u);
  const Scene& s = scenes[0];
  ASSERT_EQ(s.vehicles.size(), 1u);
  EXPECT_EQ(s.ms_vehicle, 0);
  const Cuboid& own = s.vehicles[0];
  EXPECT_NEAR(s.ms_position.z(), 2.0 * own.half_extents.z() + 0.1, 1e-12);
  EXPECT_NEAR(s.ms_position.x(), own.center.x(), 1e-12);
  EXPECT_EQ(s.bs_position, Vec3(0.0, 0.0, 3.0));
}

TEST(Sampler, Deterministic) {
  const auto cfg = default_sampler_config();
  const auto a = sample_sequence(cfg, 0, 42, 3);
  const auto b = sample_sequence(cfg, 0, 42, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    ASSERT_EQ(a[t].vehicles.size(), b[t].vehicles.size());
    EXPECT_EQ(a[t].ms_position, b[t].ms_position);
    for (std::size_t v = 0; v < a[t].vehicles.size(); ++v) EXPECT_EQ(a[t].vehicles[v].center, b[t].vehicles[v].center);
  }
  const auto other = sample_sequence(cfg, 0, 43, 3);
  EXPECT_TRUE(other[0].vehicles.size() != a[0].vehicles.size() || other[0].ms_position != a[0].ms_position);
}

TEST(Sampler, MsStaysInsideAreaAndMovesAtLaneSpeed) {
  const auto cfg = default_sampler_config();
  for (std::int64_t seq = 0; seq < 100; ++seq) {
    const auto scenes = sample_sequence(cfg, 0, 11, seq);
    ASSERT_FALSE(scenes.empty());
    const double speed = ms_lane_speed(cfg, scenes[0]);
    ASSERT_GT(speed, 0.0);
    for (std::size_t t = 0; t < scenes.size(); ++t) {
      const Scene& s = scenes[t];
      EXPECT_TRUE(s.area.contains(s.ms_position.x(), s.ms_position.y())) << "seq " << seq << " t " << t;
      EXPECT_EQ(s.time_index, static_cast<std::int64_t>(t));
      if (t > 0) EXPECT_NEAR(std::abs(s.ms_position.x() - scenes[t - 1].ms_position.x()), speed * cfg.time_step, 1e-9);
    }
  }
}

TEST(Sampler, VehiclesInALaneDoNotOverlap) {
  const auto cfg = default_sampler_config();
  for (std::int64_t seq = 0; seq < 20; ++seq) {
    for (const Scene& s : sample_sequence(cfg, 0, 5, seq)) {
      for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
        for (std::size_t j = i + 1; j < s.vehicles.size(); ++j) {
          const Cuboid& a = s.vehicles[i];
          const Cuboid& b = s.vehicles[j];
          if (std::abs(a.center.y() - b.center.y()) > 1e-9) continue;
          EXPECT_GE(std::abs(a.center.x() - b.center.x()), a.half_extents.x() + b.half_extents.x() - 1e-9);
        }
      }
    }
  }
}

TEST(Sampler, LengthLimits) {
  const auto cfg = default_sampler_config();
  EXPECT_THROW((void)sample_sequence(cfg, 100000, 1), std::invalid_argument);
  const auto full = sample_sequence(cfg, 0, 1);
  const auto explicit_len = sample_sequence(cfg, 3, 1);
  EXPECT_EQ(explicit_len.size(), 3u);
  EXPECT_GT(full.size(), 3u);
}

TEST(Sampler, InfeasiblePlacementThrows) {
  auto cfg = default_sampler_config();
  cfg.min_vehicles_per_lane = 500;
  cfg.max_vehicles_per_lane = 500;
  cfg.max_retries = 5;
  EXPECT_THROW((void)sample_sequence(cfg, 1, 1), std::runtime_error);
}

TEST(Sampler, BadConfigThrows) {
  auto cfg = default_sampler_config();
  cfg.min_vehicles_per_lane = 5;
  cfg.max_vehicles_per_lane = 2;
  EXPECT_THROW((void)sample_sequence(cfg, 1, 1), std::invalid_argument);
  cfg = default_sampler_config();
  cfg.lanes.clear();
  EXPECT_THROW((void)sample_sequence(cfg, 1, 1), std::invalid_argument);
}

TEST(StaticWalls, GroundAndFacades) {
  auto cfg = default_sampler_config();
  const auto walls = static_walls(cfg);
  ASSERT_EQ(walls.size(), 3u);
  EXPECT_NEAR(walls[0].center.z() + walls[0].half_extents.z(), 0.0, 1e-12);
  for (std::size_t i = 1; i < walls.size(); ++i) {
    EXPECT_NEAR(std::abs(walls[i].center.y()) - walls[i].half_extents.y(), cfg.building_setback, 1e-12);
    EXPECT_EQ(walls[i].material, Material::concrete);
  }
  cfg.include_buildings = false;
  EXPECT_EQ(static_walls(cfg).size(), 1u);
  cfg.include_ground = false;
  EXPECT_TRUE(static_walls(cfg).empty());
}
