#include "beamsem/nn/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "beamsem/error.hpp"

namespace beamsem::nn {

namespace {

constexpr char kMagic[] = "BSNET1";
constexpr std::size_t kMagicSize = 6;

static_assert(std::endian::native == std::endian::little, "model files are written in little-endian byte order");

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError(path + ": truncated model file");
  return v;
}

void put_tensor(std::ofstream& out, const std::string& name, const Tensor& t) {
  put(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put(out, static_cast<std::uint64_t>(d));
  out.write(reinterpret_cast<const char*>(t.values().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor scalar(double v) { return Tensor({1}, v); }

std::size_t meta_size(const std::map<std::string, Tensor>& m, const std::string& key, const std::string& path) {
  const auto it = m.find(key);
  if (it == m.end() || it->second.size() != 1) throw DataError(path + ": missing " + key);
  const double v = it->second[0];
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) throw DataError(path + ": bad " + key);
  return static_cast<std::size_t>(v);
}

}  // namespace

void save_model(const BeamModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, kMagicSize);
  const ModelSpec& s = model.spec();
  put_tensor(out, "meta.kind", scalar(static_cast<double>(static_cast<int>(s.kind))));
  put_tensor(out, "meta.cameras", scalar(static_cast<double>(s.cameras)));
  put_tensor(out, "meta.heatmap_rows", scalar(static_cast<double>(s.heatmap_rows)));
  put_tensor(out, "meta.heatmap_cols", scalar(static_cast<double>(s.heatmap_cols)));
  put_tensor(out, "meta.pool", scalar(static_cast<double>(s.pool)));
  put_tensor(out, "meta.conv_channels", scalar(static_cast<double>(s.conv_channels)));
  put_tensor(out, "meta.hidden", scalar(static_cast<double>(s.hidden)));
  put_tensor(out, "meta.stage1_channels", scalar(static_cast<double>(s.stage1_channels)));
  put_tensor(out, "meta.outputs", scalar(static_cast<double>(s.outputs)));
  put_tensor(out, "meta.seed", scalar(static_cast<double>(s.seed)));
  put_tensor(out, "meta.min_count", scalar(static_cast<double>(model.candidates.min_count)));
  Tensor pairs({model.candidates.pairs.size(), 2});
  for (std::size_t i = 0; i < model.candidates.pairs.size(); ++i) {
    pairs[2 * i] = model.candidates.pairs[i].tx;
    pairs[2 * i + 1] = model.candidates.pairs[i].rx;
  }
  put_tensor(out, "meta.candidates", pairs);
  for (const auto& prm : model.parameters()) put_tensor(out, prm.name, prm.value);
  if (!out) throw std::runtime_error("error writing " + path);
}

BeamModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path);
  char magic[kMagicSize];
  if (!in.read(magic, kMagicSize) || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw DataError(path + ": not a BSNET1 model file");
  }
  std::map<std::string, Tensor> tensors;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto name_len = get<std::uint32_t>(in, path);
    if (name_len > 4096) throw DataError(path + ": corrupt tensor name");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw DataError(path + ": truncated model file");
    const auto rank = get<std::uint32_t>(in, path);
    if (rank > 8) throw DataError(path + ": corrupt tensor rank");
    Shape shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(get<std::uint64_t>(in, path));
      count *= d;
      if (count > (1ULL << 32)) throw DataError(path + ": tensor too large");
    }
    Tensor t(shape);
    if (!in.read(reinterpret_cast<char*>(t.values().data()), static_cast<std::streamsize>(count * sizeof(double)))) {
      throw DataError(path + ": truncated model file");
    }
    tensors.insert_or_assign(name, std::move(t));
  }

  ModelSpec spec;
  const std::size_t kind = meta_size(tensors, "meta.kind", path);
  if (kind > 2) throw DataError(path + ": unknown model kind");
  spec.kind = static_cast<ModelKind>(kind);
  spec.cameras = meta_size(tensors, "meta.cameras", path);
  spec.heatmap_rows = meta_size(tensors, "meta.heatmap_rows", path);
  spec.heatmap_cols = meta_size(tensors, "meta.heatmap_cols", path);
  spec.pool = static_cast<int>(meta_size(tensors, "meta.pool", path));
  spec.conv_channels = meta_size(tensors, "meta.conv_channels", path);
  spec.hidden = meta_size(tensors, "meta.hidden", path);
  spec.stage1_channels = meta_size(tensors, "meta.stage1_channels", path);
  spec.outputs = meta_size(tensors, "meta.outputs", path);
  spec.seed = meta_size(tensors, "meta.seed", path);

  BeamModel model = [&] {
    try {
      return BeamModel(spec);
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ": " + e.what());
    }
  }();
  model.candidates.min_count = static_cast<int>(meta_size(tensors, "meta.min_count", path));
  const auto cit = tensors.find("meta.candidates");
  if (cit == tensors.end() || cit->second.rank() != 2 || cit->second.dim(1) != 2 || cit->second.dim(0) != spec.outputs) {
    throw DataError(path + ": candidate list does not match the output size");
  }
  for (std::size_t i = 0; i < spec.outputs; ++i) {
    model.candidates.pairs.push_back({static_cast<int>(cit->second[2 * i]), static_cast<int>(cit->second[2 * i + 1])});
  }
  for (auto& prm : model.parameters()) {
    const auto it = tensors.find(prm.name);
    if (it == tensors.end()) throw DataError(path + ": missing tensor " + prm.name);
    if (it->second.shape() != prm.value.shape()) {
      throw DataError(path + ": tensor " + prm.name + " has shape " + shape_string(it->second.shape()) + ", expected " +
                      shape_string(prm.value.shape()));
    }
    prm.value = it->second;
  }
  return model;
}

}  // namespace beamsem::nn
