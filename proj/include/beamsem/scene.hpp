#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamsem/channel.hpp"

namespace beamsem {

enum class Material { metal, concrete };

[[nodiscard]] const char* to_string(Material m);
[[nodiscard]] Material material_from_string(const std::string& name);

/// Box rotated by `yaw` about the vertical axis through its center.
struct Cuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;
  Material material = Material::metal;

  [[nodiscard]] bool valid() const { return (half_extents.array() > 0.0).all(); }
  /// World -> box-local frame (axis-aligned box centred at the origin).
  [[nodiscard]] Vec3 to_local(const Vec3& world) const;
  [[nodiscard]] Vec3 to_world_direction(const Vec3& local) const;
  [[nodiscard]] bool contains(const Vec3& world) const;
};

/// Coverage rectangle centred on the BS: length along world x (street
/// direction), width along world y.
struct Area {
  double width = 48.0;
  double length = 192.0;

  [[nodiscard]] bool contains(double x, double y) const {
    return x >= -0.5 * length && x <= 0.5 * length && y >= -0.5 * width && y <= 0.5 * width;
  }
};

struct Scene {
  Vec3 bs_position{0.0, 0.0, 3.0};
  Vec3 ms_position = Vec3::Zero();
  double ms_yaw = 0.0;
  std::vector<Cuboid> vehicles;
  /// Index into `vehicles` of the MS's own vehicle, -1 if none.
  int ms_vehicle = -1;
  std::vector<Cuboid> walls;
  Area area;
  std::int64_t sequence_id = 0;
  std::int64_t time_index = 0;
};

struct VehicleType {
  std::string name;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct Lane {
  double offset = 0.0;     ///< lateral position (world y) of the lane centre
  double direction = 1.0;  ///< +1 travels towards +x, -1 towards -x
  double speed = 10.0;     ///< m/s
};

struct SceneSamplerConfig {
  std::vector<VehicleType> vehicle_types;
  std::vector<Lane> lanes;
  Area area;
  double time_step = 0.5;  ///< T_C, seconds between samples
  double bs_height = 3.0;
  double antenna_offset = 0.1;  ///< MS antenna height above its roof
  int min_vehicles_per_lane = 2;
  int max_vehicles_per_lane = 10;
  double min_gap = 2.0;  ///< bumper-to-bumper spacing within a lane
  /// Extra road length beyond the area in which traffic is spawned.
  double spawn_margin = 40.0;
  int max_retries = 200;
  bool include_ground = true;
  bool include_buildings = true;
  double building_setback = 22.0;  ///< |y| of the building facades
  double building_height = 20.0;
};

/// Defaults: five vehicle types, a 48 x 192 m area, T_C = 0.5 s,
/// BS at 3 m, eight lanes (four per direction).
[[nodiscard]] SceneSamplerConfig default_sampler_config();

/// Ground slab and building blocks implied by `cfg`.
[[nodiscard]] std::vector<Cuboid> static_walls(const SceneSamplerConfig& cfg);

/// Number of steps an MS travelling in `lane` can take while staying inside
/// the area.
[[nodiscard]] int max_sequence_length(const SceneSamplerConfig& cfg, const Lane& lane, double vehicle_length);

/// One MS drive through the area. All randomness is drawn from a stream keyed
/// by (seed, sequence_id); scenes at later times follow deterministically.
/// `length` <= 0 means "as many steps as the MS stays inside the area".
/// Throws std::runtime_error if traffic cannot be placed within max_retries.
[[nodiscard]] std::vector<Scene> sample_sequence(const SceneSamplerConfig& cfg, int length, std::uint64_t seed,
                                                 std::int64_t sequence_id = 0);

}  // namespace beamsem
