#include "beamsem/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beamsem/rng.hpp"

namespace beamsem {

const char* to_string(Material m) { return m == Material::metal ? "metal" : "concrete"; }

Material material_from_string(const std::string& name) {
  if (name == "metal") return Material::metal;
  if (name == "concrete") return Material::concrete;
  throw std::invalid_argument("unknown material '" + name + "'");
}

Vec3 Cuboid::to_local(const Vec3& world) const {
  const Vec3 d = world - center;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 Cuboid::to_world_direction(const Vec3& local) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z()};
}

bool Cuboid::contains(const Vec3& world) const {
  const Vec3 p = to_local(world);
  return (p.array().abs() <= half_extents.array()).all();
}

SceneSamplerConfig default_sampler_config() {
  SceneSamplerConfig cfg;
  cfg.vehicle_types = {
      {"car1", 4.81, 2.17, 1.52}, {"car2", 4.90, 2.06, 1.48}, {"car3", 4.15, 2.00, 1.38},
      {"van", 5.20, 2.62, 2.48},  {"bus", 11.08, 3.25, 3.33},
  };
  const double offsets[] = {2.5, 6.0, 9.5, 13.0};
  const double speeds[] = {14.0, 12.0, 10.0, 8.0};
  for (int i = 0; i < 4; ++i) {
    cfg.lanes.push_back({offsets[i], 1.0, speeds[i]});
    cfg.lanes.push_back({-offsets[i], -1.0, speeds[i]});
  }
  return cfg;
}

std::vector<Cuboid> static_walls(const SceneSamplerConfig& cfg) {
  std::vector<Cuboid> walls;
  const double half_road = 0.5 * cfg.area.length + cfg.spawn_margin + 20.0;
  if (cfg.include_ground) {
    Cuboid ground;
    ground.center = {0.0, 0.0, -0.5};
    ground.half_extents = {half_road, cfg.building_setback + 10.0, 0.5};
    ground.material = Material::concrete;
    walls.push_back(ground);
  }
  if (cfg.include_buildings) {
    constexpr double depth = 10.0;
    for (const double side : {1.0, -1.0}) {
      Cuboid block;
      block.center = {0.0, side * (cfg.building_setback + 0.5 * depth), 0.5 * cfg.building_height};
      block.half_extents = {half_road, 0.5 * depth, 0.5 * cfg.building_height};
      block.material = Material::concrete;
      walls.push_back(block);
    }
  }
  return walls;
}

int max_sequence_length(const SceneSamplerConfig& cfg, const Lane& lane, double /*vehicle_length*/) {
  const double step = lane.speed * cfg.time_step;
  if (!(step > 0.0)) throw std::invalid_argument("lane speed and time step must be positive");
  return static_cast<int>(std::floor(cfg.area.length / step)) + 1;
}

namespace {

struct Placed {
  double position;  ///< along-lane coordinate at t = 0
  std::size_t type;
};

double ring_distance(double a, double b, double ring) {
  const double d = std::fmod(std::abs(a - b), ring);
  return std::min(d, ring - d);
}

double wrap_to_ring(double x, double start, double ring) {
  double r = std::fmod(x - start, ring);
  if (r < 0.0) r += ring;
  return start + r;
}

Cuboid vehicle_box(const VehicleType& t, double x, const Lane& lane) {
  Cuboid c;
  c.center = {x, lane.offset, 0.5 * t.height};
  c.half_extents = {0.5 * t.length, 0.5 * t.width, 0.5 * t.height};
  c.yaw = lane.direction > 0.0 ? 0.0 : std::numbers::pi;
  c.material = Material::metal;
  return c;
}

}  // namespace

std::vector<Scene> sample_sequence(const SceneSamplerConfig& cfg, int length, std::uint64_t seed,
                                   std::int64_t sequence_id) {
  if (cfg.lanes.empty() || cfg.vehicle_types.empty()) throw std::invalid_argument("sampler needs lanes and vehicle types");
  for (const auto& t : cfg.vehicle_types) {
    if (!(t.length > 0.0 && t.width > 0.0 && t.height > 0.0)) throw std::invalid_argument("vehicle dimensions must be positive");
  }
  if (cfg.min_vehicles_per_lane < 0 || cfg.max_vehicles_per_lane < cfg.min_vehicles_per_lane) {
    throw std::invalid_argument("invalid vehicles-per-lane range");
  }

  Rng rng(stream_key(seed, static_cast<std::uint64_t>(sequence_id)));
  const std::size_t ms_lane_index = rng.index(cfg.lanes.size());
  const Lane& ms_lane = cfg.lanes[ms_lane_index];
  const std::size_t ms_type = rng.index(cfg.vehicle_types.size());

  const int steps_max = max_sequence_length(cfg, ms_lane, cfg.vehicle_types[ms_type].length);
  if (length <= 0) length = steps_max;
  if (length > steps_max) {
    throw std::invalid_argument("sequence of " + std::to_string(length) + " steps leaves the area (max " +
                                std::to_string(steps_max) + ")");
  }
  const double step = ms_lane.speed * cfg.time_step;
  const double slack = cfg.area.length - step * static_cast<double>(length - 1);
  const double ms_start = ms_lane.direction * (-0.5 * cfg.area.length + rng.uniform() * slack);

  const double ring_start = -0.5 * cfg.area.length - cfg.spawn_margin;
  const double ring = cfg.area.length + 2.0 * cfg.spawn_margin;

  std::vector<std::vector<Placed>> traffic(cfg.lanes.size());
  traffic[ms_lane_index].push_back({ms_start, ms_type});
  for (std::size_t li = 0; li < cfg.lanes.size(); ++li) {
    const auto span = static_cast<std::uint64_t>(cfg.max_vehicles_per_lane - cfg.min_vehicles_per_lane + 1);
    const int count = cfg.min_vehicles_per_lane + static_cast<int>(rng.index(span));
    for (int n = 0; n < count; ++n) {
      const std::size_t type = rng.index(cfg.vehicle_types.size());
      bool placed = false;
      for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
        const double pos = ring_start + rng.uniform() * ring;
        const bool clear = std::all_of(traffic[li].begin(), traffic[li].end(), [&](const Placed& other) {
          const double need = 0.5 * (cfg.vehicle_types[type].length + cfg.vehicle_types[other.type].length) + cfg.min_gap;
          return ring_distance(pos, other.position, ring) >= need;
        });
        if (clear) {
          traffic[li].push_back({pos, type});
          placed = true;
        }
      }
      if (!placed) {
        throw std::runtime_error("sample_sequence: could not place vehicle in lane " + std::to_string(li) + " after " +
                                 std::to_string(cfg.max_retries) + " attempts");
      }
    }
  }

  const auto walls = static_walls(cfg);
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    const double time = static_cast<double>(t) * cfg.time_step;
    Scene s;
    s.area = cfg.area;
    s.walls = walls;
    s.sequence_id = sequence_id;
    s.time_index = t;
    s.bs_position = {0.0, 0.0, cfg.bs_height};

    const VehicleType& own = cfg.vehicle_types[ms_type];
    const double ms_x = ms_start + ms_lane.direction * ms_lane.speed * time;
    s.vehicles.push_back(vehicle_box(own, ms_x, ms_lane));
    s.ms_vehicle = 0;
    s.ms_position = {ms_x, ms_lane.offset, own.height + cfg.antenna_offset};
    s.ms_yaw = s.vehicles.front().yaw;

    for (std::size_t li = 0; li < cfg.lanes.size(); ++li) {
      const Lane& lane = cfg.lanes[li];
      const std::size_t first = li == ms_lane_index ? 1 : 0;
      for (std::size_t k = first; k < traffic[li].size(); ++k) {
        const double x = wrap_to_ring(traffic[li][k].position + lane.direction * lane.speed * time, ring_start, ring);
        s.vehicles.push_back(vehicle_box(cfg.vehicle_types[traffic[li][k].type], x, lane));
      }
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

}  // namespace beamsem
