#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "beamsem/codebook.hpp"
#include "beamsem/error.hpp"
#include "beamsem/harness/config.hpp"
#include "beamsem/harness/dataset.hpp"
#include "beamsem/harness/experiment.hpp"
#include "beamsem/harness/metrics.hpp"
#include "beamsem/semantics.hpp"

namespace py = pybind11;
using namespace beamsem;
using namespace beamsem::harness;

namespace {

ExperimentConfig config_from(const std::map<std::string, std::string>& overrides) {
  KeyValues kv;
  for (const auto& [k, v] : overrides) kv.set(k, v);
  return ExperimentConfig::from(kv);
}

py::array_t<double> plane_array(const SemanticHeatmap& hm, bool strength) {
  py::array_t<double> out({hm.cameras(), hm.rows(), hm.cols()});
  const auto src = strength ? hm.strength_data() : hm.distribution_data();
  std::copy(src.begin(), src.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_beamsem, m) {
  m.doc() = "Beam selection from semantic heatmaps";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init<std::size_t, std::size_t>(), py::arg("vertical"), py::arg("horizontal"))
      .def_readwrite("vertical", &ArrayGeometry::vertical)
      .def_readwrite("horizontal", &ArrayGeometry::horizontal)
      .def("size", &ArrayGeometry::size);

  py::class_<PathComponent>(m, "PathComponent")
      .def(py::init<>())
      .def_readwrite("gain", &PathComponent::gain)
      .def_readwrite("aoa_elevation", &PathComponent::aoa_elevation)
      .def_readwrite("aoa_azimuth", &PathComponent::aoa_azimuth)
      .def_readwrite("aod_elevation", &PathComponent::aod_elevation)
      .def_readwrite("aod_azimuth", &PathComponent::aod_azimuth)
      .def_readwrite("path_length", &PathComponent::path_length)
      .def_readwrite("is_los", &PathComponent::is_los);

  py::class_<BeamPair>(m, "BeamPair")
      .def(py::init<int, int>(), py::arg("tx"), py::arg("rx"))
      .def_readwrite("tx", &BeamPair::tx)
      .def_readwrite("rx", &BeamPair::rx)
      .def("__eq__", [](const BeamPair& a, const BeamPair& b) { return a == b; })
      .def("__repr__", [](const BeamPair& p) { return "BeamPair(" + std::to_string(p.tx) + ", " + std::to_string(p.rx) + ")"; });

  py::class_<CandidateSet>(m, "CandidateSet")
      .def_readonly("pairs", &CandidateSet::pairs)
      .def_readonly("min_count", &CandidateSet::min_count)
      .def("__len__", &CandidateSet::size)
      .def("contains", &CandidateSet::contains);

  py::class_<Codebook>(m, "Codebook")
      .def_readonly("fixed_elevation", &Codebook::fixed_elevation)
      .def_readonly("azimuths", &Codebook::azimuths)
      .def_readonly("vectors", &Codebook::vectors)
      .def("__len__", &Codebook::size);

  m.def("steering_vector", &steering_vector, py::arg("geometry"), py::arg("elevation"), py::arg("azimuth"));
  m.def("build_codebook", &build_codebook, py::arg("geometry"), py::arg("size"), py::arg("fixed_elevation"));
  m.def(
      "channel_from_paths",
      [](const std::vector<PathComponent>& paths, const ArrayGeometry& rx, const ArrayGeometry& tx) {
        return channel_from_paths(paths, rx, tx);
      },
      py::arg("paths"), py::arg("rx"), py::arg("tx"));
  m.def("beam_pair_gains", &beam_pair_gains, py::arg("h"), py::arg("tx_codebook"), py::arg("rx_codebook"));
  m.def("optimal_pair", [](const BeamPairGains& g) { return optimal_pair(g); }, py::arg("gains"));
  m.def("top_k_pairs", [](const BeamPairGains& g, std::size_t k) { return top_k_pairs(g, k); }, py::arg("gains"),
        py::arg("k"));

  py::class_<EffectiveScatterer>(m, "EffectiveScatterer")
      .def(py::init<>())
      .def_readwrite("camera", &EffectiveScatterer::camera)
      .def_readwrite("heatmap_row", &EffectiveScatterer::heatmap_row)
      .def_readwrite("heatmap_col", &EffectiveScatterer::heatmap_col)
      .def_readwrite("relative_power", &EffectiveScatterer::relative_power);

  py::class_<CameraConfig>(m, "CameraConfig")
      .def_readwrite("image_rows", &CameraConfig::image_rows)
      .def_readwrite("image_cols", &CameraConfig::image_cols)
      .def_readwrite("downsample", &CameraConfig::downsample)
      .def_readwrite("sigma", &CameraConfig::sigma)
      .def("heatmap_rows", &CameraConfig::heatmap_rows)
      .def("heatmap_cols", &CameraConfig::heatmap_cols)
      .def("count", &CameraConfig::count);
  m.def("default_camera_config", &default_camera_config);

  py::class_<SemanticHeatmap>(m, "SemanticHeatmap")
      .def_property_readonly("distribution", [](const SemanticHeatmap& h) { return plane_array(h, false); })
      .def_property_readonly("strength", [](const SemanticHeatmap& h) { return plane_array(h, true); });

  py::class_<Detection>(m, "Detection")
      .def_readonly("camera", &Detection::camera)
      .def_readonly("row", &Detection::row)
      .def_readonly("col", &Detection::col)
      .def_readonly("score", &Detection::score);

  py::class_<PrecisionRecall>(m, "PrecisionRecall")
      .def_readonly("precision", &PrecisionRecall::precision)
      .def_readonly("recall", &PrecisionRecall::recall)
      .def_readonly("matched", &PrecisionRecall::matched);

  m.def(
      "rasterize_heatmaps",
      [](const std::vector<EffectiveScatterer>& s, const CameraConfig& c) { return rasterize_heatmaps(s, c); },
      py::arg("scatterers"), py::arg("cameras"));
  m.def("decode_heatmaps", &decode_heatmaps, py::arg("heatmap"), py::arg("threshold") = 0.3);
  m.def(
      "precision_recall",
      [](const std::vector<Detection>& d, const std::vector<EffectiveScatterer>& truth, double radius) {
        return precision_recall(d, heatmap_points(truth), radius);
      },
      py::arg("detections"), py::arg("truth"), py::arg("radius") = 3.0);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init(&config_from), py::arg("overrides") = std::map<std::string, std::string>{})
      .def("to_dict", [](const ExperimentConfig& c) { return c.to_key_values().values(); })
      .def_readonly("cameras", &ExperimentConfig::cameras);
  m.def("make_codebooks", [](const ExperimentConfig& c) {
    auto b = make_codebooks(c);
    return py::make_tuple(b.tx, b.rx);
  });

  py::class_<DatasetRecord>(m, "DatasetRecord")
      .def_readonly("sequence_id", &DatasetRecord::sequence_id)
      .def_readonly("time_index", &DatasetRecord::time_index)
      .def_readonly("x", &DatasetRecord::x)
      .def_readonly("y", &DatasetRecord::y)
      .def_readonly("is_los", &DatasetRecord::is_los)
      .def_readonly("outage", &DatasetRecord::outage)
      .def_readonly("paths", &DatasetRecord::paths)
      .def_readonly("optimal", &DatasetRecord::optimal)
      .def_readonly("optimal_gain", &DatasetRecord::optimal_gain)
      .def_readonly("scatterers", &DatasetRecord::scatterers);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("config", &Dataset::config)
      .def_readonly("seed", &Dataset::seed)
      .def_readonly("sequences", &Dataset::sequences)
      .def_readonly("records", &Dataset::records);

  m.def("generate_dataset", &generate_dataset, py::arg("config"), py::arg("sequences"), py::arg("seed"),
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("dir"));
  m.def("read_dataset", &read_dataset, py::arg("dir"));

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("a", &MetricsReport::a)
      .def_readonly("t", &MetricsReport::t)
      .def_readonly("a_los", &MetricsReport::a_los)
      .def_readonly("t_los", &MetricsReport::t_los)
      .def_readonly("a_nlos", &MetricsReport::a_nlos)
      .def_readonly("t_nlos", &MetricsReport::t_nlos)
      .def_readonly("samples", &MetricsReport::samples);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("p_th_db", &SweepRow::p_th_db)
      .def_readonly("a1", &SweepRow::a1)
      .def_readonly("t1", &SweepRow::t1)
      .def_readonly("n_e", &SweepRow::n_e);

  // Split, train and evaluate in one call; returns the report per model kind.
  m.def(
      "run_experiment",
      [](const Dataset& ds, double train_fraction, std::uint64_t seed, const std::vector<std::string>& kinds) {
        const Split split = split_by_sequence(ds.records, train_fraction, seed);
        const auto tr = select_records(ds.records, split.train);
        const auto te = select_records(ds.records, split.test);
        const CandidateSet cand = candidates_from(ds.records, tr, ds.config.min_count);
        const auto train_set = build_samples(ds.records, tr, ds.config, cand);
        const auto test_set = build_samples(ds.records, te, ds.config, cand);
        std::map<std::string, MetricsReport> out;
        for (const auto& k : kinds) {
          nn::BeamModel model = train_model(nn::model_kind_from_string(k), train_set, cand, ds.config);
          out[k] = evaluate_model(model, test_set, ds.config);
        }
        return py::make_tuple(out, cand);
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0,
      py::arg("kinds") = std::vector<std::string>{"semantic", "location"});

  m.def(
      "sweep_threshold",
      [](const Dataset& ds, double train_fraction, std::uint64_t seed, const std::vector<double>& thresholds,
         bool retrain) {
        const Split split = split_by_sequence(ds.records, train_fraction, seed);
        return sweep_threshold(ds, split, thresholds, SweepOptions{retrain});
      },
      py::arg("dataset"), py::arg("train_fraction"), py::arg("seed"), py::arg("thresholds"), py::arg("retrain") = true);
}
