#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamsem/error.hpp"
#include "beamsem/harness/config.hpp"
#include "beamsem/harness/dataset.hpp"
#include "beamsem/harness/experiment.hpp"
#include "beamsem/harness/metrics.hpp"
#include "beamsem/nn/model_io.hpp"

namespace fs = std::filesystem;
using namespace beamsem;
using namespace beamsem::harness;

namespace {

Split load_split(const fs::path& data) {
  const fs::path p = data / "split.txt";
  if (!fs::exists(p)) throw DataError(p.string() + " not found; run `beamsem split` first");
  return read_split(p);
}

void print_report(const MetricsReport& r, std::ostream& out) {
  std::fprintf(stdout, "samples=%zu los=%zu nlos=%zu N_E=%.4f\n", r.samples, r.los_samples, r.nlos_samples,
               r.mean_scatterers);
  std::fprintf(stdout, "%3s %8s %8s %8s %8s %8s %8s\n", "K", "A", "T", "A_los", "T_los", "A_nlos", "T_nlos");
  for (std::size_t k = 0; k < r.kmax(); ++k) {
    std::fprintf(stdout, "%3zu %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", k + 1, r.a[k], r.t[k], r.a_los[k], r.t_los[k],
                 r.a_nlos[k], r.t_nlos[k]);
  }
  for (const auto& p : r.pr_curve) {
    std::fprintf(stdout, "pr threshold=%.2f precision=%.4f recall=%.4f\n", p.threshold, p.precision, p.recall);
  }
  out.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-aided mmWave beam selection: dataset generation, training and evaluation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a dataset of traced street scenes");
  std::size_t sequences = 0;
  std::uint64_t gen_seed = 1;
  std::string out_dir;
  std::string config_path;
  unsigned threads = 0;
  gen->add_option("--sequences", sequences, "Number of vehicle sequences")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", out_dir, "Output dataset directory")->required();
  gen->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  gen->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // split
  auto* split_cmd = app.add_subcommand("split", "Split a dataset into train/test by sequence");
  std::string data_dir = "data";
  double train_frac = 0.8;
  std::uint64_t split_seed = 1;
  split_cmd->add_option("--data", data_dir, "Dataset directory");
  split_cmd->add_option("--train-frac", train_frac, "Fraction of sequences used for training")
      ->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", split_seed, "Shuffle seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a beam predictor on the training split");
  std::string stage = "2";
  int epochs = -1;
  double beta = -1.0;
  double lr = -1.0;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  double heatmap_noise = -1.0;
  std::string model_out;
  std::string trace_csv;
  train_cmd->add_option("--data", data_dir, "Dataset directory");
  train_cmd->add_option("--stage", stage, "2 (heatmap + location), joint, or location")
      ->check(CLI::IsMember({"2", "joint", "location"}));
  train_cmd->add_option("--epochs", epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--beta", beta, "Weight of the soft gain target")->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--lr", lr, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_seed, "Initialisation and shuffle seed")->each([&](const std::string&) {
    train_seed_set = true;
  });
  train_cmd->add_option("--heatmap-noise", heatmap_noise, "Heatmap jitter (px) during stage-2 training")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--model-out", model_out, "Output model file")->required();
  train_cmd->add_option("--trace-csv", trace_csv, "Write the per-epoch loss trace here");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained model on the test split");
  std::string model_path;
  int kmax = 10;
  std::string csv_path;
  std::string pr_csv_path;
  eval_cmd->add_option("--data", data_dir, "Dataset directory");
  eval_cmd->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--kmax", kmax, "Largest K reported")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--csv", csv_path, "Write the A/T table as CSV");
  eval_cmd->add_option("--pr-csv", pr_csv_path, "Write the heatmap precision/recall curve (joint models)");

  // sweep-threshold
  auto* sweep_cmd = app.add_subcommand("sweep-threshold", "Retrain the stage-2 model at several power thresholds");
  std::vector<double> thresholds{-1.0, -5.0, -10.0, -15.0};
  std::string sweep_csv;
  bool no_retrain = false;
  sweep_cmd->add_option("--data", data_dir, "Dataset directory");
  sweep_cmd->add_option("--thresholds", thresholds, "Thresholds in dB, descending")->delimiter(',');
  sweep_cmd->add_option("--epochs", epochs, "Training epochs per threshold")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--csv", sweep_csv, "Write the table as CSV");
  sweep_cmd->add_flag("--no-retrain", no_retrain, "Only report N_E");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Print one record and optionally dump its heatmaps");
  std::size_t record_index = 0;
  std::string pgm_dir;
  inspect_cmd->add_option("--data", data_dir, "Dataset directory");
  inspect_cmd->add_option("--record", record_index, "Record index (0-based)")->required();
  inspect_cmd->add_option("--pgm-dir", pgm_dir, "Write D/S heatmaps per camera as PGM files here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = ExperimentConfig::from(KeyValues::load(config_path));
      const auto t0 = std::chrono::steady_clock::now();
      const Dataset ds = generate_dataset(cfg, sequences, gen_seed, threads);
      write_dataset(ds, out_dir);
      std::size_t los = 0, outage = 0;
      for (const auto& r : ds.records) {
        los += r.is_los ? 1 : 0;
        outage += r.outage ? 1 : 0;
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("wrote %zu records (%zu LOS, %zu outage) from %zu sequences to %s in %.1f s\n", ds.records.size(), los,
                  outage, sequences, out_dir.c_str(), secs);
    } else if (*split_cmd) {
      if (!(train_frac > 0.0 && train_frac < 1.0)) {
        std::cerr << "--train-frac must be strictly between 0 and 1\n";
        return 1;
      }
      const Dataset ds = read_dataset(data_dir);
      std::set<std::int64_t> ids;
      for (const auto& r : ds.records) ids.insert(r.sequence_id);
      if (ids.size() < 2) throw DataError("dataset has " + std::to_string(ids.size()) + " sequence(s); a split needs two");
      const Split s = split_by_sequence(ds.records, train_frac, split_seed);
      write_split(s, fs::path(data_dir) / "split.txt");
      std::printf("train sequences: %zu, test sequences: %zu\n", s.train.size(), s.test.size());
    } else if (*train_cmd) {
      Dataset ds = read_dataset(data_dir);
      ExperimentConfig cfg = ds.config;
      if (epochs >= 0) cfg.train.epochs = epochs;
      if (beta >= 0.0) cfg.train.beta = beta;
      if (lr > 0.0) cfg.train.learning_rate = lr;
      if (train_seed_set) cfg.train.seed = train_seed;
      if (heatmap_noise >= 0.0) cfg.train.heatmap_noise = heatmap_noise;
      const nn::ModelKind kind = stage == "2"       ? nn::ModelKind::semantic
                                 : stage == "joint" ? nn::ModelKind::joint
                                                    : nn::ModelKind::location;
      const Split s = load_split(data_dir);
      const auto train_idx = select_records(ds.records, s.train);
      const CandidateSet candidates = candidates_from(ds.records, train_idx, cfg.min_count);
      SampleOptions so;
      so.with_scene = kind == nn::ModelKind::joint;
      const auto train_set = build_samples(ds.records, train_idx, cfg, candidates, so);
      std::printf("training %s model on %zu samples, %zu candidate pairs\n", nn::to_string(kind), train_set.size(),
                  candidates.size());
      nn::TrainResult trace;
      nn::BeamModel model = train_model(kind, train_set, candidates, cfg, &trace);
      for (const auto& e : trace.trace) std::printf("epoch %d %s loss=%.6f top1=%.4f\n", e.epoch, e.split.c_str(), e.loss, e.top1);
      nn::save_model(model, model_out);
      if (!trace_csv.empty()) nn::write_trace_csv(trace_csv, trace);
      std::printf("saved %s\n", model_out.c_str());
    } else if (*eval_cmd) {
      Dataset ds = read_dataset(data_dir);
      ExperimentConfig cfg = ds.config;
      cfg.kmax = kmax;
      nn::BeamModel model = nn::load_model(model_path);
      const Split s = load_split(data_dir);
      SampleOptions so;
      so.with_scene = model.spec().kind == nn::ModelKind::joint;
      const auto test_set = build_samples(ds.records, select_records(ds.records, s.test), cfg, model.candidates, so);
      if (test_set.empty()) throw DataError("test split has no labelled records");
      const MetricsReport r = evaluate_model(model, test_set, cfg);
      std::printf("%s model, %zu candidates, uniform-random A(1)=%.4f\n", nn::to_string(model.spec().kind),
                  model.candidates.size(), uniform_random_top1(model.candidates));
      print_report(r, std::cout);
      if (!csv_path.empty()) write_metrics_csv(r, csv_path);
      if (!pr_csv_path.empty()) write_pr_csv(r.pr_curve, pr_csv_path);
    } else if (*sweep_cmd) {
      for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i] < thresholds[i - 1])) {
          std::cerr << "--thresholds must be strictly descending\n";
          return 1;
        }
      }
      Dataset ds = read_dataset(data_dir);
      if (epochs >= 0) ds.config.train.epochs = epochs;
      const Split s = no_retrain ? Split{} : load_split(data_dir);
      SweepOptions so;
      so.retrain = !no_retrain;
      const auto rows = sweep_threshold(ds, s, thresholds, so);
      std::printf("%8s %8s %8s %8s\n", "P_th", "A(1)", "T(1)", "N_E");
      for (const auto& r : rows) std::printf("%8.1f %8.4f %8.4f %8.4f\n", r.p_th_db, r.a1, r.t1, r.n_e);
      if (!sweep_csv.empty()) write_sweep_csv(rows, sweep_csv);
    } else if (*inspect_cmd) {
      const Dataset ds = read_dataset(data_dir);
      if (record_index >= ds.records.size()) {
        throw DataError("record " + std::to_string(record_index) + " out of range (dataset has " +
                        std::to_string(ds.records.size()) + ")");
      }
      const DatasetRecord& r = ds.records[record_index];
      std::printf("sequence=%lld t=%lld pose=(%.3f, %.3f, %.3f, yaw %.4f) los=%d outage=%d\n",
                  static_cast<long long>(r.sequence_id), static_cast<long long>(r.time_index), r.x, r.y, r.z, r.yaw,
                  r.is_los ? 1 : 0, r.outage ? 1 : 0);
      if (r.optimal) std::printf("optimal pair: tx=%d rx=%d gain=%.6g\n", r.optimal->tx, r.optimal->rx, r.optimal_gain);
      std::printf("%zu paths, %zu vehicles\n", r.paths.size(), r.vehicles.size());
      for (std::size_t i = 0; i < r.paths.size(); ++i) {
        const auto& p = r.paths[i];
        std::printf("  path %zu: |a|=%.4g len=%.3f bounces=%d aoa=(%.4f, %.4f) aod=(%.4f, %.4f)\n", i, std::abs(p.gain),
                    p.path_length, p.bounce_count, p.aoa_elevation, p.aoa_azimuth, p.aod_elevation, p.aod_azimuth);
      }
      for (const auto& e : r.scatterers) {
        std::printf("  scatterer cam=%d px=(%d, %d) power=%.4f path=%zu\n", e.camera, e.heatmap_row, e.heatmap_col,
                    e.relative_power, e.source_path);
      }
      if (!pgm_dir.empty()) {
        fs::create_directories(pgm_dir);
        const SemanticHeatmap hm = rasterize_heatmaps(r.scatterers, ds.config.cameras);
        for (int c = 0; c < hm.cameras(); ++c) {
          write_pgm(fs::path(pgm_dir) / ("cam" + std::to_string(c) + "_D.pgm"), hm.distribution_plane(c), hm.rows(), hm.cols());
          write_pgm(fs::path(pgm_dir) / ("cam" + std::to_string(c) + "_S.pgm"), hm.strength_plane(c), hm.rows(), hm.cols());
        }
        std::printf("wrote %d heatmap pairs to %s\n", hm.cameras(), pgm_dir.c_str());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
