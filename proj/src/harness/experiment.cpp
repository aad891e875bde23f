#include "beamsem/harness/experiment.hpp"

#include <fstream>
#include <stdexcept>

#include "beamsem/nn/augment.hpp"

namespace beamsem::harness {

nn::BeamModel train_model(nn::ModelKind kind, std::span<const nn::TrainingSample> train_set, const CandidateSet& candidates,
                          const ExperimentConfig& cfg, nn::TrainResult* trace,
                          std::span<const nn::TrainingSample> validation) {
  nn::BeamModel model(cfg.model_spec(kind, candidates.size(), cfg.train.seed));
  model.candidates = candidates;
  nn::TrainConfig tc = cfg.train;
  if (kind != nn::ModelKind::semantic) tc.heatmap_noise = 0.0;
  nn::TrainResult result = nn::train(model, train_set, tc, cfg.cameras, validation);
  if (trace) *trace = std::move(result);
  return model;
}

std::vector<std::vector<double>> predict_all(nn::BeamModel& model, std::span<const nn::TrainingSample> samples,
                                             const CameraConfig& cameras) {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(nn::predict(model, s, cameras));
  return out;
}

MetricsReport evaluate_model(nn::BeamModel& model, std::span<const nn::TrainingSample> samples, const ExperimentConfig& cfg) {
  if (model.candidates.size() != model.spec().outputs) {
    throw std::invalid_argument("evaluate: model has no candidate list matching its outputs");
  }
  if (model.spec().kind != nn::ModelKind::joint) {
    return evaluate_scores(samples, predict_all(model, samples, cfg.cameras), model.candidates, cfg.kmax, cfg.throughput,
                           cfg.noise_power, cfg.cameras.count());
  }

  std::vector<std::vector<double>> scores;
  std::vector<double> thresholds;
  for (int i = 1; i <= 9; ++i) thresholds.push_back(0.1 * i);
  std::vector<std::size_t> matched(thresholds.size()), predicted(thresholds.size()), truth(thresholds.size());
  for (const auto& s : samples) {
    const nn::PreparedInput prepared = nn::prepare_input(model, s, cfg.cameras);
    nn::Graph g;
    nn::ModelInput in;
    in.location = &s.location;
    in.image = &prepared.image;
    const nn::ModelOutput out = model.forward(g, in);
    scores.push_back(g.value(nn::softmax(g, out.logits)).values());
    const SemanticHeatmap hm = nn::heatmap_from_tensor(g.value(*out.heatmap));
    const auto gt = heatmap_points(s.scatterers);
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      const auto pr = precision_recall(decode_heatmaps(hm, thresholds[i]), gt, 3.0);
      matched[i] += pr.matched;
      predicted[i] += pr.predicted;
      truth[i] += pr.ground_truth;
    }
  }
  MetricsReport r = evaluate_scores(samples, scores, model.candidates, cfg.kmax, cfg.throughput, cfg.noise_power,
                                    cfg.cameras.count());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    PrPoint p;
    p.threshold = thresholds[i];
    p.precision = predicted[i] ? static_cast<double>(matched[i]) / static_cast<double>(predicted[i]) : (truth[i] ? 0.0 : 1.0);
    p.recall = truth[i] ? static_cast<double>(matched[i]) / static_cast<double>(truth[i]) : 1.0;
    r.pr_curve.push_back(p);
  }
  return r;
}

MetricsReport location_baseline(std::span<const nn::TrainingSample> train_set, std::span<const nn::TrainingSample> test_set,
                                 const CandidateSet& candidates, const ExperimentConfig& cfg) {
  nn::BeamModel model = train_model(nn::ModelKind::location, train_set, candidates, cfg);
  return evaluate_model(model, test_set, cfg);
}

double uniform_random_top1(const CandidateSet& candidates) {
  if (candidates.pairs.empty()) throw std::invalid_argument("empty candidate set");
  return 1.0 / static_cast<double>(candidates.size());
}

std::vector<SweepRow> sweep_threshold(const Dataset& ds, const Split& split, std::span<const double> thresholds,
                                      const SweepOptions& opts) {
  if (thresholds.empty()) throw std::invalid_argument("sweep: no thresholds given");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] < thresholds[i - 1])) throw std::invalid_argument("sweep: thresholds must be strictly descending");
  }
  const ExperimentConfig& cfg = ds.config;
  const auto train_idx = select_records(ds.records, split.train);
  const auto test_idx = select_records(ds.records, split.test);
  std::vector<std::size_t> all_idx;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (!ds.records[i].outage) all_idx.push_back(i);
  }
  CandidateSet candidates;
  if (opts.retrain) candidates = candidates_from(ds.records, train_idx, cfg.min_count);

  std::vector<SweepRow> rows;
  for (double th : thresholds) {
    SweepRow row;
    row.p_th_db = th;
    std::vector<std::vector<EffectiveScatterer>> per_record;
    per_record.reserve(all_idx.size());
    for (std::size_t i : all_idx) per_record.push_back(record_scatterers(ds.records[i], cfg, th));
    row.n_e = mean_effective_scatterers(per_record, cfg.cameras.count());
    if (opts.retrain) {
      SampleOptions so;
      so.p_th_db = th;
      const auto train_set = build_samples(ds.records, train_idx, cfg, candidates, so);
      const auto test_set = build_samples(ds.records, test_idx, cfg, candidates, so);
      nn::BeamModel model = train_model(nn::ModelKind::semantic, train_set, candidates, cfg);
      const MetricsReport r = evaluate_model(model, test_set, cfg);
      row.a1 = r.a[0];
      row.t1 = r.t[0];
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P_th,A1,T1,N_E\n";
  for (const auto& r : rows) {
    out << format_double(r.p_th_db) << ',' << format_double(r.a1) << ',' << format_double(r.t1) << ','
        << format_double(r.n_e) << '\n';
  }
}

}  // namespace beamsem::harness
