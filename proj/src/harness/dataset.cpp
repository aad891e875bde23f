#include "beamsem/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "beamsem/error.hpp"
#include "beamsem/nn/encoding.hpp"
#include "beamsem/rng.hpp"

namespace beamsem::harness {

using Json = nlohmann::ordered_json;

DatasetRecord make_record(const Scene& scene, const ExperimentConfig& cfg, const Codebooks& books) {
  DatasetRecord rec;
  rec.sequence_id = scene.sequence_id;
  rec.time_index = scene.time_index;
  rec.x = scene.ms_position.x();
  rec.y = scene.ms_position.y();
  rec.z = scene.ms_position.z();
  rec.yaw = scene.ms_yaw;
  rec.vehicles = scene.vehicles;
  rec.ms_vehicle = scene.ms_vehicle;
  rec.paths = trace_paths(scene, cfg.trace);
  rec.is_los = std::any_of(rec.paths.begin(), rec.paths.end(), [](const PathComponent& p) { return p.is_los; });
  if (rec.paths.empty()) {
    rec.outage = true;
    return rec;
  }
  const BeamPairGains gains = beam_pair_gains_from_paths(rec.paths, books.tx, books.rx);
  rec.optimal = optimal_pair(gains);
  rec.optimal_gain = gains(rec.optimal->tx, rec.optimal->rx);
  rec.scatterers = locate_scatterers(extract_effective_scatterers(rec.paths, cfg.p_th_db, scene), cfg.cameras);
  return rec;
}

Dataset generate_dataset(const ExperimentConfig& cfg, std::size_t sequences, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.seed = seed;
  ds.sequences = sequences;
  const Codebooks books = make_codebooks(cfg);

  std::vector<std::vector<DatasetRecord>> per_sequence(sequences);
  std::vector<std::exception_ptr> errors(sequences);
  const auto work = [&](std::size_t s) {
    try {
      for (const Scene& scene : sample_sequence(cfg.sampler, cfg.sequence_length, seed, static_cast<std::int64_t>(s))) {
        per_sequence[s].push_back(make_record(scene, cfg, books));
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(sequences, 1)));
  if (threads <= 1) {
    for (std::size_t s = 0; s < sequences; ++s) work(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < sequences; s += threads) work(s);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t s = 0; s < sequences; ++s) {
    if (errors[s]) std::rethrow_exception(errors[s]);
    for (auto& r : per_sequence[s]) ds.records.push_back(std::move(r));
  }
  return ds;
}

Scene record_scene(const DatasetRecord& rec, const ExperimentConfig& cfg) {
  Scene s;
  s.bs_position = {0.0, 0.0, cfg.sampler.bs_height};
  s.ms_position = {rec.x, rec.y, rec.z};
  s.ms_yaw = rec.yaw;
  s.vehicles = rec.vehicles;
  s.ms_vehicle = rec.ms_vehicle;
  s.walls = static_walls(cfg.sampler);
  s.area = cfg.sampler.area;
  s.sequence_id = rec.sequence_id;
  s.time_index = rec.time_index;
  return s;
}

std::vector<EffectiveScatterer> record_scatterers(const DatasetRecord& rec, const ExperimentConfig& cfg, double p_th_db) {
  if (rec.paths.empty()) return {};
  Scene s;
  s.bs_position = {0.0, 0.0, cfg.sampler.bs_height};
  s.ms_position = {rec.x, rec.y, rec.z};
  s.ms_yaw = rec.yaw;
  return locate_scatterers(extract_effective_scatterers(rec.paths, p_th_db, s), cfg.cameras);
}

namespace {

Json vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string record_to_json(const DatasetRecord& rec) {
  Json j;
  j["seq"] = rec.sequence_id;
  j["t"] = rec.time_index;
  j["pose"] = Json::array({rec.x, rec.y, rec.z, rec.yaw});
  j["los"] = rec.is_los;
  j["outage"] = rec.outage;
  j["opt"] = rec.optimal ? Json::array({rec.optimal->tx, rec.optimal->rx}) : Json(nullptr);
  j["opt_gain"] = rec.optimal_gain;
  Json paths = Json::array();
  for (const auto& p : rec.paths) {
    paths.push_back({{"g", {p.gain.real(), p.gain.imag()}},
                     {"aoa", {p.aoa_elevation, p.aoa_azimuth}},
                     {"aod", {p.aod_elevation, p.aod_azimuth}},
                     {"len", p.path_length},
                     {"bounces", p.bounce_count},
                     {"hop", vec3(p.last_hop_point)},
                     {"los", p.is_los}});
  }
  j["paths"] = std::move(paths);
  Json scat = Json::array();
  for (const auto& e : rec.scatterers) {
    scat.push_back({{"cam", e.camera},
                    {"img", {e.image_point.row, e.image_point.col}},
                    {"hm", {e.heatmap_row, e.heatmap_col}},
                    {"power", e.relative_power},
                    {"path", e.source_path}});
  }
  j["scatterers"] = std::move(scat);
  Json veh = Json::array();
  for (const auto& v : rec.vehicles) {
    veh.push_back({{"c", vec3(v.center)}, {"h", vec3(v.half_extents)}, {"yaw", v.yaw}, {"mat", to_string(v.material)}});
  }
  j["vehicles"] = std::move(veh);
  j["ms_vehicle"] = rec.ms_vehicle;
  return j.dump();
}

DatasetRecord record_from_json(const std::string& line) {
  DatasetRecord rec;
  try {
    const Json j = Json::parse(line);
    rec.sequence_id = j.at("seq").get<std::int64_t>();
    rec.time_index = j.at("t").get<std::int64_t>();
    const auto& pose = j.at("pose");
    if (pose.size() != 4) throw DataError("pose needs 4 values");
    rec.x = pose[0].get<double>();
    rec.y = pose[1].get<double>();
    rec.z = pose[2].get<double>();
    rec.yaw = pose[3].get<double>();
    rec.is_los = j.at("los").get<bool>();
    rec.outage = j.at("outage").get<bool>();
    if (!j.at("opt").is_null()) rec.optimal = BeamPair{j["opt"].at(0).get<int>(), j["opt"].at(1).get<int>()};
    rec.optimal_gain = j.at("opt_gain").get<double>();
    for (const auto& p : j.at("paths")) {
      PathComponent pc;
      pc.gain = {p.at("g").at(0).get<double>(), p.at("g").at(1).get<double>()};
      pc.aoa_elevation = p.at("aoa").at(0).get<double>();
      pc.aoa_azimuth = p.at("aoa").at(1).get<double>();
      pc.aod_elevation = p.at("aod").at(0).get<double>();
      pc.aod_azimuth = p.at("aod").at(1).get<double>();
      pc.path_length = p.at("len").get<double>();
      pc.bounce_count = p.at("bounces").get<int>();
      pc.last_hop_point = to_vec3(p.at("hop"));
      pc.is_los = p.at("los").get<bool>();
      rec.paths.push_back(pc);
    }
    for (const auto& s : j.at("scatterers")) {
      EffectiveScatterer e;
      e.camera = s.at("cam").get<int>();
      e.image_point = {s.at("img").at(0).get<double>(), s.at("img").at(1).get<double>()};
      e.heatmap_row = s.at("hm").at(0).get<int>();
      e.heatmap_col = s.at("hm").at(1).get<int>();
      e.relative_power = s.at("power").get<double>();
      e.source_path = s.at("path").get<std::size_t>();
      rec.scatterers.push_back(e);
    }
    for (const auto& v : j.at("vehicles")) {
      Cuboid c;
      c.center = to_vec3(v.at("c"));
      c.half_extents = to_vec3(v.at("h"));
      c.yaw = v.at("yaw").get<double>();
      c.material = material_from_string(v.at("mat").get<std::string>());
      rec.vehicles.push_back(c);
    }
    rec.ms_vehicle = j.at("ms_vehicle").get<int>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  if (rec.outage != rec.paths.empty() || rec.outage == rec.optimal.has_value()) {
    throw DataError("record " + std::to_string(rec.sequence_id) + "/" + std::to_string(rec.time_index) +
                    ": outage flag inconsistent with its paths");
  }
  return rec;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  KeyValues manifest = ds.config.to_key_values();
  manifest.set("seed", std::to_string(ds.seed));
  manifest.set("sequences", std::to_string(ds.sequences));
  manifest.set("records", std::to_string(ds.records.size()));
  {
    std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
    out << manifest.render();
  }
  std::ofstream out(dir / "records.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "records.jsonl").string());
  for (const auto& r : ds.records) out << record_to_json(r) << '\n';
  if (!out) throw std::runtime_error("error writing " + (dir / "records.jsonl").string());
}

Dataset read_dataset(const std::filesystem::path& dir) {
  KeyValues manifest = KeyValues::load(dir / "manifest.txt");
  Dataset ds;
  const auto take_uint = [&](const std::string& key) -> std::uint64_t {
    try {
      return std::stoull(manifest.get(key));
    } catch (const std::logic_error&) {
      throw DataError("manifest: bad value for '" + key + "'");
    }
  };
  ds.seed = take_uint("seed");
  ds.sequences = take_uint("sequences");
  const std::uint64_t expected = take_uint("records");
  KeyValues cfg_kv;
  for (const auto& [k, v] : manifest.values()) {
    if (k != "seed" && k != "sequences" && k != "records") cfg_kv.set(k, v);
  }
  ds.config = ExperimentConfig::from(cfg_kv);

  std::ifstream in(dir / "records.jsonl", std::ios::binary);
  if (!in) throw DataError("cannot open " + (dir / "records.jsonl").string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ds.records.push_back(record_from_json(line));
    } catch (const DataError& e) {
      throw DataError("records.jsonl:" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ds.records.size() != expected) {
    throw DataError("manifest lists " + std::to_string(expected) + " records, found " + std::to_string(ds.records.size()));
  }
  return ds;
}

Split split_by_sequence(std::span<const DatasetRecord> records, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must be in (0, 1)");
  std::set<std::int64_t> unique;
  for (const auto& r : records) unique.insert(r.sequence_id);
  if (unique.size() < 2) throw std::invalid_argument("split needs at least two sequences, got " + std::to_string(unique.size()));
  std::vector<std::int64_t> ids(unique.begin(), unique.end());
  Rng rng(stream_key(seed, 0x5b117));
  rng.shuffle(std::span<std::int64_t>(ids));
  const auto n = ids.size();
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  s.train_fraction = train_fraction;
  s.seed = seed;
  return s;
}

namespace {

std::string join(const std::vector<std::int64_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out;
}

std::vector<std::int64_t> parse_ids(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::logic_error&) {
      throw DataError("split file: bad sequence id '" + item + "'");
    }
  }
  return out;
}

}  // namespace

void write_split(const Split& split, const std::filesystem::path& path) {
  KeyValues kv;
  kv.set("train", join(split.train));
  kv.set("test", join(split.test));
  kv.set("train_fraction", format_double(split.train_fraction));
  kv.set("seed", std::to_string(split.seed));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kv.render();
}

Split read_split(const std::filesystem::path& path) {
  const KeyValues kv = KeyValues::load(path);
  Split s;
  s.train = parse_ids(kv.get("train"));
  s.test = parse_ids(kv.get("test"));
  try {
    s.train_fraction = std::stod(kv.get("train_fraction"));
    s.seed = std::stoull(kv.get("seed"));
  } catch (const std::logic_error&) {
    throw DataError("split file: bad train_fraction or seed");
  }
  return s;
}

std::vector<std::size_t> select_records(std::span<const DatasetRecord> records, std::span<const std::int64_t> ids) {
  const std::set<std::int64_t> wanted(ids.begin(), ids.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].outage && wanted.count(records[i].sequence_id)) out.push_back(i);
  }
  return out;
}

CandidateSet candidates_from(std::span<const DatasetRecord> records, std::span<const std::size_t> indices, int min_count) {
  std::vector<BeamPair> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (records[i].optimal) labels.push_back(*records[i].optimal);
  }
  return build_candidate_set(labels, min_count);
}

std::vector<nn::TrainingSample> build_samples(std::span<const DatasetRecord> records, std::span<const std::size_t> indices,
                                              const ExperimentConfig& cfg, const CandidateSet& candidates,
                                              const SampleOptions& opts) {
  if (candidates.pairs.empty()) throw std::invalid_argument("build_samples: empty candidate set");
  const Codebooks books = make_codebooks(cfg);
  std::vector<nn::TrainingSample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    const DatasetRecord& rec = records[i];
    if (rec.outage) continue;
    nn::TrainingSample s;
    s.location = nn::assemble_location_vector(rec.x, rec.y, rec.z - cfg.sampler.bs_height, rec.yaw, cfg.sampler.area).tensor();
    s.scatterers = opts.p_th_db ? record_scatterers(rec, cfg, *opts.p_th_db) : rec.scatterers;
    if (opts.with_scene) s.scene = record_scene(rec, cfg);
    const BeamPairGains gains = beam_pair_gains_from_paths(rec.paths, books.tx, books.rx);
    s.gains.reserve(candidates.size());
    for (const auto& p : candidates.pairs) s.gains.push_back(gains(p.tx, p.rx));
    s.label = *candidates.index_of(optimal_pair(gains, &candidates));
    s.optimal = *rec.optimal;
    s.optimal_gain = rec.optimal_gain;
    s.is_los = rec.is_los;
    s.key = stream_key(static_cast<std::uint64_t>(rec.sequence_id), static_cast<std::uint64_t>(rec.time_index));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace beamsem::harness
