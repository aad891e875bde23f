#include "beamsem/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "beamsem/error.hpp"

namespace beamsem::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.has(key)) throw DataError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.set(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const std::string& KeyValues::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw DataError("missing key '" + key + "'");
  return it->second;
}

std::string KeyValues::render() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* to_string(ThroughputMode m) {
  switch (m) {
    case ThroughputMode::linear: return "linear";
    case ThroughputMode::linear_sum: return "linear_sum";
    case ThroughputMode::log2: return "log2";
  }
  return "?";
}

ThroughputMode throughput_mode_from_string(const std::string& s) {
  if (s == "linear") return ThroughputMode::linear;
  if (s == "linear_sum") return ThroughputMode::linear_sum;
  if (s == "log2") return ThroughputMode::log2;
  throw DataError("unknown throughput mode '" + s + "'");
}

namespace {

// One entry per config key: how to read it into the struct and how to write it back.
struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> read;
  std::function<std::string(const ExperimentConfig&)> write;
};

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("key '" + key + "': not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("key '" + key + "': not an integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw DataError("key '" + key + "': not a boolean: '" + s + "'");
}

template <typename Get>
Field real(const std::string& key, Get get) {
  return {[key, get](ExperimentConfig& c, const std::string& s) { get(c) = parse_double(key, s); },
          [get](const ExperimentConfig& c) { return format_double(get(c)); }};
}

template <typename Get>
Field integer(const std::string& key, Get get) {
  return {[key, get](ExperimentConfig& c, const std::string& s) {
            using T = std::remove_reference_t<decltype(get(c))>;
            get(c) = static_cast<T>(parse_int(key, s));
          },
          [get](const ExperimentConfig& c) { return std::to_string(get(c)); }};
}

template <typename Get>
Field boolean(const std::string& key, Get get) {
  return {[key, get](ExperimentConfig& c, const std::string& s) { get(c) = parse_bool(key, s); },
          [get](const ExperimentConfig& c) { return std::string(get(c) ? "1" : "0"); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["sequence_length"] = integer("sequence_length", [](auto& c) -> auto& { return c.sequence_length; });
    f["time_step"] = real("time_step", [](auto& c) -> auto& { return c.sampler.time_step; });
    f["bs_height"] = real("bs_height", [](auto& c) -> auto& { return c.sampler.bs_height; });
    f["antenna_offset"] = real("antenna_offset", [](auto& c) -> auto& { return c.sampler.antenna_offset; });
    f["min_vehicles_per_lane"] =
        integer("min_vehicles_per_lane", [](auto& c) -> auto& { return c.sampler.min_vehicles_per_lane; });
    f["max_vehicles_per_lane"] =
        integer("max_vehicles_per_lane", [](auto& c) -> auto& { return c.sampler.max_vehicles_per_lane; });
    f["min_gap"] = real("min_gap", [](auto& c) -> auto& { return c.sampler.min_gap; });
    f["area_width"] = real("area_width", [](auto& c) -> auto& { return c.sampler.area.width; });
    f["area_length"] = real("area_length", [](auto& c) -> auto& { return c.sampler.area.length; });
    f["include_ground"] = boolean("include_ground", [](auto& c) -> auto& { return c.sampler.include_ground; });
    f["include_buildings"] =
        boolean("include_buildings", [](auto& c) -> auto& { return c.sampler.include_buildings; });
    f["building_setback"] = real("building_setback", [](auto& c) -> auto& { return c.sampler.building_setback; });
    f["building_height"] = real("building_height", [](auto& c) -> auto& { return c.sampler.building_height; });

    f["max_reflections"] = integer("max_reflections", [](auto& c) -> auto& { return c.trace.max_reflections; });
    f["max_paths"] = integer("max_paths", [](auto& c) -> auto& { return c.trace.max_paths; });
    f["carrier_frequency"] = real("carrier_frequency", [](auto& c) -> auto& { return c.trace.carrier_frequency; });
    f["gamma_metal"] =
        real("gamma_metal", [](auto& c) -> auto& { return c.trace.reflection_coeff.at(Material::metal); });
    f["gamma_concrete"] =
        real("gamma_concrete", [](auto& c) -> auto& { return c.trace.reflection_coeff.at(Material::concrete); });

    f["tx_rows"] = integer("tx_rows", [](auto& c) -> auto& { return c.tx_array.vertical; });
    f["tx_cols"] = integer("tx_cols", [](auto& c) -> auto& { return c.tx_array.horizontal; });
    f["rx_rows"] = integer("rx_rows", [](auto& c) -> auto& { return c.rx_array.vertical; });
    f["rx_cols"] = integer("rx_cols", [](auto& c) -> auto& { return c.rx_array.horizontal; });
    f["tx_codebook"] = integer("tx_codebook", [](auto& c) -> auto& { return c.tx_codebook; });
    f["rx_codebook"] = integer("rx_codebook", [](auto& c) -> auto& { return c.rx_codebook; });
    f["tx_elevation_deg"] = real("tx_elevation_deg", [](auto& c) -> auto& { return c.tx_elevation_deg; });
    f["rx_elevation_deg"] = real("rx_elevation_deg", [](auto& c) -> auto& { return c.rx_elevation_deg; });
    f["min_count"] = integer("min_count", [](auto& c) -> auto& { return c.min_count; });

    f["image_rows"] = integer("image_rows", [](auto& c) -> auto& { return c.cameras.image_rows; });
    f["image_cols"] = integer("image_cols", [](auto& c) -> auto& { return c.cameras.image_cols; });
    f["downsample"] = integer("downsample", [](auto& c) -> auto& { return c.cameras.downsample; });
    f["sigma"] = real("sigma", [](auto& c) -> auto& { return c.cameras.sigma; });
    f["p_th_db"] = real("p_th_db", [](auto& c) -> auto& { return c.p_th_db; });

    f["beta"] = real("beta", [](auto& c) -> auto& { return c.train.beta; });
    f["epochs"] = integer("epochs", [](auto& c) -> auto& { return c.train.epochs; });
    f["lr"] = real("lr", [](auto& c) -> auto& { return c.train.learning_rate; });
    f["momentum"] = real("momentum", [](auto& c) -> auto& { return c.train.momentum; });
    f["batch_size"] = integer("batch_size", [](auto& c) -> auto& { return c.train.batch_size; });
    f["train_seed"] = integer("train_seed", [](auto& c) -> auto& { return c.train.seed; });
    f["halve_on_plateau"] =
        boolean("halve_on_plateau", [](auto& c) -> auto& { return c.train.halve_on_plateau; });
    f["grad_clip"] = real("grad_clip", [](auto& c) -> auto& { return c.train.grad_clip; });
    f["heatmap_noise"] = real("heatmap_noise", [](auto& c) -> auto& { return c.train.heatmap_noise; });
    f["pool"] = integer("pool", [](auto& c) -> auto& { return c.pool; });
    f["conv_channels"] = integer("conv_channels", [](auto& c) -> auto& { return c.conv_channels; });
    f["hidden"] = integer("hidden", [](auto& c) -> auto& { return c.hidden; });
    f["stage1_channels"] = integer("stage1_channels", [](auto& c) -> auto& { return c.stage1_channels; });

    f["throughput"] = {[](ExperimentConfig& c, const std::string& s) { c.throughput = throughput_mode_from_string(s); },
                       [](const ExperimentConfig& c) { return std::string(to_string(c.throughput)); }};
    f["noise_power"] = real("noise_power", [](auto& c) -> auto& { return c.noise_power; });
    f["kmax"] = integer("kmax", [](auto& c) -> auto& { return c.kmax; });
    return f;
  }();
  return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const KeyValues& kv) {
  ExperimentConfig cfg;
  const auto& table = fields();
  for (const auto& [key, value] : kv.values()) {
    const auto it = table.find(key);
    if (it == table.end()) throw DataError("unknown config key '" + key + "'");
    it->second.read(cfg, value);
  }
  cfg.validate();
  return cfg;
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  for (const auto& [key, field] : fields()) kv.set(key, field.write(*this));
  return kv;
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& m) { throw DataError("invalid config: " + m); };
  if (sequence_length < 0) fail("sequence_length must be >= 0");
  if (!(sampler.time_step > 0.0)) fail("time_step must be positive");
  if (sampler.min_vehicles_per_lane < 0 || sampler.max_vehicles_per_lane < sampler.min_vehicles_per_lane) {
    fail("need 0 <= min_vehicles_per_lane <= max_vehicles_per_lane");
  }
  if (!(sampler.area.width > 0.0 && sampler.area.length > 0.0)) fail("area must have positive size");
  if (!tx_array.valid() || !rx_array.valid()) fail("array sizes must be >= 1");
  if (tx_codebook < 1 || rx_codebook < 1) fail("codebook sizes must be >= 1");
  if (min_count < 0) fail("min_count must be >= 0");
  if (pool < 1 || conv_channels < 1 || hidden < 1 || stage1_channels < 1) fail("network sizes must be >= 1");
  if (kmax < 1) fail("kmax must be >= 1");
  if (!(noise_power > 0.0)) fail("noise_power must be positive");
  try {
    trace.validate();
    cameras.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

nn::ModelSpec ExperimentConfig::model_spec(nn::ModelKind kind, std::size_t outputs, std::uint64_t seed) const {
  nn::ModelSpec s;
  s.kind = kind;
  s.cameras = cameras.count();
  s.heatmap_rows = static_cast<std::size_t>(cameras.heatmap_rows());
  s.heatmap_cols = static_cast<std::size_t>(cameras.heatmap_cols());
  s.pool = pool;
  s.conv_channels = static_cast<std::size_t>(conv_channels);
  s.hidden = static_cast<std::size_t>(hidden);
  s.stage1_channels = static_cast<std::size_t>(stage1_channels);
  s.outputs = outputs;
  s.seed = seed;
  return s;
}

Codebooks make_codebooks(const ExperimentConfig& cfg) {
  return {build_codebook(cfg.tx_array, static_cast<std::size_t>(cfg.tx_codebook), cfg.tx_elevation_deg * kDeg),
          build_codebook(cfg.rx_array, static_cast<std::size_t>(cfg.rx_codebook), cfg.rx_elevation_deg * kDeg)};
}

}  // namespace beamsem::harness
