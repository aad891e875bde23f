// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "beamsem/codebook.hpp"
#include "beamsem/harness/config.hpp"
#include "beamsem/harness/dataset.hpp"
#include "beamsem/harness/experiment.hpp"
#include "beamsem/harness/metrics.hpp"
#include "beamsem/nn/augment.hpp"
#include "beamsem/nn/model_io.hpp"
#include "beamsem/raytrace.hpp"
#include "beamsem/semantics.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace beamsem;
using namespace beamsem::harness;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Metric-law bookkeeping shared by every evaluation in the run.
struct LawCheck {
  std::size_t tables = 0;
  std::size_t violations = 0;
  std::string first;

  void check_curve(const std::vector<double>& a, const std::vector<double>& t, const std::string& what) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (std::isnan(a[k]) && std::isnan(t[k])) continue;
      bool ok = t[k] >= a[k] && a[k] >= 0.0 && t[k] <= 1.0 + 1e-12;
      if (k > 0) ok = ok && a[k] >= a[k - 1] && t[k] >= t[k - 1];
      if (!ok) {
        if (violations == 0) first = fmt("%s K=%zu A=%.6f T=%.6f", what.c_str(), k + 1, a[k], t[k]);
        ++violations;
      }
    }
  }
  void check(const MetricsReport& r, const std::string& what) {
    ++tables;
    check_curve(r.a, r.t, what);
    check_curve(r.a_los, r.t_los, what + " LOS");
    check_curve(r.a_nlos, r.t_nlos, what + " NLOS");
  }
};

LawCheck laws;

// 1. Exhaustive beam search against explicit loops. The oracle gains come
// from per-path beam projections, so they never go through H.
void criterion1() {
  const ExperimentConfig cfg;
  const Codebooks books = make_codebooks(cfg);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> el(0.3, kPi - 0.3), az(-kPi, kPi), amp(0.05, 1.0), ph(-kPi, kPi);
  std::uniform_int_distribution<int> npaths(1, 8);
  double lib_time = 0.0, worst_gain = 0.0;
  std::size_t mismatches = 0;
  const auto t0 = Clock::now();
  const std::size_t ct = books.tx.size();
  const std::size_t cr = books.rx.size();
  const auto response = [](const ArrayGeometry& g, double theta, double phi) {
    std::vector<std::complex<double>> v(g.size());
    for (std::size_t a = 0; a < g.vertical; ++a)
      for (std::size_t b = 0; b < g.horizontal; ++b)
        v[a * g.horizontal + b] =
            std::polar(1.0 / std::sqrt(static_cast<double>(g.size())),
                       kPi * (static_cast<double>(a) * std::cos(theta) + static_cast<double>(b) * std::sin(theta) * std::sin(phi)));
    return v;
  };
  std::vector<std::complex<double>> field(ct * cr);
  std::vector<double> oracle(ct * cr);
  for (int n = 0; n < 200; ++n) {
    std::vector<PathComponent> paths(static_cast<std::size_t>(npaths(rng)));
    for (auto& p : paths) {
      p.gain = std::polar(amp(rng), ph(rng));
      p.aoa_elevation = el(rng);
      p.aoa_azimuth = az(rng);
      p.aod_elevation = el(rng);
      p.aod_azimuth = az(rng);
    }
    const auto t1 = Clock::now();
    const BeamPairGains gains = beam_pair_gains(channel_from_paths(paths, cfg.rx_array, cfg.tx_array), books.tx, books.rx);
    const BeamPair best = optimal_pair(gains);
    const auto top = top_k_pairs(gains, 10);
    lib_time += seconds_since(t1);

    std::fill(field.begin(), field.end(), 0.0);
    for (const auto& p : paths) {
      const auto ar = response(cfg.rx_array, p.aoa_elevation, p.aoa_azimuth);
      const auto at = response(cfg.tx_array, p.aod_elevation, p.aod_azimuth);
      std::vector<std::complex<double>> rho(cr), tau(ct);
      for (std::size_t j = 0; j < cr; ++j)
        for (std::size_t r = 0; r < ar.size(); ++r)
          rho[j] += std::conj(books.rx.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j))) * ar[r];
      for (std::size_t i = 0; i < ct; ++i)
        for (std::size_t t = 0; t < at.size(); ++t)
          tau[i] += std::conj(at[t]) * books.tx.vectors(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
      for (std::size_t i = 0; i < ct; ++i)
        for (std::size_t j = 0; j < cr; ++j) field[i * cr + j] += p.gain * rho[j] * tau[i];
    }
    double peak = 0.0;
    for (std::size_t k = 0; k < field.size(); ++k) peak = std::max(peak, oracle[k] = std::norm(field[k]));

    // Naive scan of the library gains: selection must match exactly.
    std::vector<std::size_t> order(ct * cr);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return gains(static_cast<Eigen::Index>(a / cr), static_cast<Eigen::Index>(a % cr)) >
             gains(static_cast<Eigen::Index>(b / cr), static_cast<Eigen::Index>(b % cr));
    });
    const auto pair_at = [&](std::size_t k) { return BeamPair{static_cast<int>(order[k] / cr), static_cast<int>(order[k] % cr)}; };
    bool ok = best == pair_at(0);
    for (std::size_t k = 0; k < 10; ++k) ok = ok && top[k] == pair_at(k);

    // Independent gains agree, and so does the oracle's own optimum up to exact ties.
    for (std::size_t i = 0; i < ct; ++i)
      for (std::size_t j = 0; j < cr; ++j)
        worst_gain = std::max(worst_gain, std::abs(gains(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - oracle[i * cr + j]) / peak);
    const std::size_t oracle_best = static_cast<std::size_t>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
    ok = ok && (oracle_best == order[0] || std::abs(oracle[oracle_best] - oracle[order[0]]) <= 1e-9 * peak);
    mismatches += ok ? 0 : 1;
  }
  const double total = seconds_since(t0);
  report(1, mismatches == 0 && worst_gain <= 1e-9 && total < 10.0,
         fmt("200 channels, %zu mismatches vs loop oracle, max relative gain error %.1e, library %.2f s, total %.2f s "
             "(limit 10 s)",
             mismatches, worst_gain, lib_time, total));
}

// 2. One on-grid path per azimuth grid point.
void criterion2() {
  const ExperimentConfig cfg;
  const Codebooks books = make_codebooks(cfg);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < books.tx.size(); ++j) {
    const std::size_t rx_index = books.rx.size() - 1 - j;
    PathComponent p;
    p.gain = std::polar(1.0, 0.3 * static_cast<double>(j));
    p.aod_elevation = books.tx.fixed_elevation;
    p.aod_azimuth = books.tx.azimuths[j];
    p.aoa_elevation = books.rx.fixed_elevation;
    p.aoa_azimuth = books.rx.azimuths[rx_index];
    const std::vector<PathComponent> paths{p};
    const BeamPairGains g = beam_pair_gains(channel_from_paths(paths, cfg.rx_array, cfg.tx_array), books.tx, books.rx);
    const BeamPair best = optimal_pair(g);
    const double err = std::abs(g(best.tx, best.rx) - 1.0);
    worst = std::max(worst, err);
    if (best != BeamPair{static_cast<int>(j), static_cast<int>(rx_index)} || err > 1e-9) ++bad;
  }
  report(2, bad == 0, fmt("64 grid points, %zu wrong, max |gain - 1| = %.2e", bad, worst));
}

// 3. Finite-difference gradient checks.
void criterion3() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& c : gradcheck::cases(seed)) {
      const double e = gradcheck::max_error(c);
      ++checked;
      if (e > worst) {
        worst = e;
        worst_name = c.name + fmt(" seed %llu", static_cast<unsigned long long>(seed));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(3, worst < 1e-4 && secs < 60.0,
         fmt("%zu checks over 20 seeds, max relative error %.2e (%s), %.1f s", checked, worst, worst_name.c_str(), secs));
}

// 4. Rasterize/decode round trip and the corruption trend.
void criterion4() {
  const CameraConfig cams = default_camera_config();
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> cam(0, 3), row(0, cams.heatmap_rows() - 1), col(0, cams.heatmap_cols() - 1), count(1, 12);
  std::uniform_real_distribution<double> power(0.05, 1.0);
  std::vector<std::vector<EffectiveScatterer>> layouts;
  for (int n = 0; n < 500; ++n) {
    std::vector<EffectiveScatterer> pts;
    const int want = count(rng);
    for (int tries = 0; tries < 1000 && static_cast<int>(pts.size()) < want; ++tries) {
      EffectiveScatterer e;
      e.camera = cam(rng);
      e.heatmap_row = row(rng);
      e.heatmap_col = col(rng);
      e.relative_power = power(rng);
      const bool clear = std::all_of(pts.begin(), pts.end(), [&](const EffectiveScatterer& p) {
        return p.camera != e.camera || std::hypot(p.heatmap_row - e.heatmap_row, p.heatmap_col - e.heatmap_col) >= 4.0;
      });
      if (clear) pts.push_back(e);
    }
    layouts.push_back(std::move(pts));
  }
  std::size_t perfect = 0;
  for (const auto& pts : layouts) {
    const auto pr = precision_recall(decode_heatmaps(rasterize_heatmaps(pts, cams), 0.3), heatmap_points(pts), 3.0);
    perfect += pr.precision == 1.0 && pr.recall == 1.0 ? 1 : 0;
  }
  std::vector<double> precision, recall;
  for (const double noise : {0.0, 1.0, 2.0, 4.0}) {
    std::size_t matched = 0, predicted = 0, truth = 0;
    for (std::size_t n = 0; n < layouts.size(); ++n) {
      const auto hm = nn::corrupt_heatmaps(rasterize_heatmaps(layouts[n], cams), noise, 9000 + n, cams);
      const auto pr = precision_recall(decode_heatmaps(hm, 0.3), heatmap_points(layouts[n]), 3.0);
      matched += pr.matched;
      predicted += pr.predicted;
      truth += pr.ground_truth;
    }
    precision.push_back(predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 1.0);
    recall.push_back(static_cast<double>(matched) / static_cast<double>(truth));
  }
  bool trend = true;
  for (std::size_t i = 1; i < precision.size(); ++i) trend = trend && precision[i] <= precision[i - 1] && recall[i] <= recall[i - 1];
  report(4, perfect == layouts.size() && trend,
         fmt("%zu/500 layouts exact; noise 0/1/2/4 px precision %.3f/%.3f/%.3f/%.3f recall %.3f/%.3f/%.3f/%.3f", perfect,
             precision[0], precision[1], precision[2], precision[3], recall[0], recall[1], recall[2], recall[3]));
}

// 5. Image-method geometry on random wall and cuboid scenes.
void criterion5() {
  std::mt19937_64 rng(505);
  RayTraceConfig cfg;
  cfg.max_paths = 10000;
  std::size_t los_mismatch = 0, length_bad = 0, angle_bad = 0, leg_blocked = 0, reflections = 0;
  double worst_len = 0.0;
  std::uniform_real_distribution<double> pos(-20, 20), z(0.5, 6), wall_off(3, 15), yaw(-kPi, kPi);
  for (int n = 0; n < 1000; ++n) {
    Scene s;
    if (n % 2 == 0) {
      // One large wall with random orientation; BS and MS in front of it.
      Cuboid w;
      const double a = yaw(rng);
      w.yaw = a;
      w.half_extents = {200.0, 0.5, 100.0};
      const Vec3 normal{-std::sin(a), std::cos(a), 0.0};
      w.center = -(wall_off(rng) + 0.5) * normal;
      w.material = Material::concrete;
      s.walls.push_back(w);
      do {
        s.bs_position = {pos(rng), pos(rng), z(rng)};
        s.ms_position = {pos(rng), pos(rng), z(rng)};
      } while (w.contains(s.bs_position) || w.contains(s.ms_position) || normal.dot(s.bs_position - w.center) <= 0.5 ||
               normal.dot(s.ms_position - w.center) <= 0.5);
    } else {
      s = oracle::random_box_scene(rng, 1 + n % 7);
    }
    los_mismatch += line_of_sight(s) == oracle::los(s) ? 0 : 1;
    for (const auto& tp : trace_paths_detailed(s, cfg)) {
      Vec3 image = s.bs_position;
      for (std::size_t k = 0; k < tp.faces.size(); ++k) {
        const Face& f = tp.faces[k];
        image = oracle::reflect_across(image, f.center, f.normal);
        const Vec3 in = (tp.vertices[k + 1] - tp.vertices[k]).normalized();
        const Vec3 out = (tp.vertices[k + 2] - tp.vertices[k + 1]).normalized();
        const bool equal_angles = std::abs(in.dot(f.normal) + out.dot(f.normal)) < 1e-9 &&
                                  (out - (in - 2.0 * in.dot(f.normal) * f.normal)).norm() < 1e-9;
        angle_bad += equal_angles ? 0 : 1;
        ++reflections;
      }
      const double err = std::abs((image - s.ms_position).norm() - tp.path.path_length);
      worst_len = std::max(worst_len, err);
      length_bad += err <= 1e-9 ? 0 : 1;
      for (std::size_t m = 0; m + 1 < tp.vertices.size(); ++m)
        for (const Cuboid* c : oracle::occluders(s))
          leg_blocked += oracle::segment_blocked(tp.vertices[m], tp.vertices[m + 1], *c) ? 1 : 0;
    }
  }
  report(5, los_mismatch == 0 && length_bad == 0 && angle_bad == 0 && leg_blocked == 0 && reflections > 0,
         fmt("1000 scenes, %zu reflections; LOS mismatches %zu, length errors %zu (max %.1e m), angle failures %zu, blocked legs %zu",
             reflections, los_mismatch, length_bad, worst_len, angle_bad, leg_blocked));
}

// 6. Effective-scatterer count versus threshold.
void criterion6() {
  ExperimentConfig cfg;
  cfg.sequence_length = 5;
  cfg.train.epochs = 5;
  const Dataset ds = generate_dataset(cfg, 100, 606);
  const Split split = split_by_sequence(ds.records, 0.8, 6);
  const std::vector<double> thresholds{-1, -5, -10, -15};
  const auto rows = sweep_threshold(ds, split, thresholds);
  bool monotone = true;
  std::string table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) monotone = monotone && rows[i].n_e >= rows[i - 1].n_e;
    laws.check_curve({rows[i].a1}, {rows[i].t1}, fmt("sweep %.0f dB", rows[i].p_th_db));
    ++laws.tables;
    table += fmt("%s%.0f dB: N_E %.3f A1 %.3f T1 %.3f", i ? "; " : "", rows[i].p_th_db, rows[i].n_e, rows[i].a1, rows[i].t1);
  }
  report(6, monotone && rows.size() == 4, fmt("%zu scenes; %s", ds.records.size(), table.c_str()));
}

// 7. Semantic vs location vs random top-1 on a sequence-disjoint split.
void criterion7() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg;
  const Dataset ds = generate_dataset(cfg, 150, 707);
  const Split split = split_by_sequence(ds.records, 0.8, 7);
  const auto train_idx = select_records(ds.records, split.train);
  const auto test_idx = select_records(ds.records, split.test);
  const CandidateSet cand = candidates_from(ds.records, train_idx, cfg.min_count);
  const auto train_set = build_samples(ds.records, train_idx, cfg, cand);
  const auto test_set = build_samples(ds.records, test_idx, cfg, cand);
  const double gen_secs = seconds_since(t0);

  nn::BeamModel sem = train_model(nn::ModelKind::semantic, train_set, cand, cfg);
  const MetricsReport r_sem = evaluate_model(sem, test_set, cfg);
  nn::BeamModel loc = train_model(nn::ModelKind::location, train_set, cand, cfg);
  const MetricsReport r_loc = evaluate_model(loc, test_set, cfg);
  const double rnd = uniform_random_top1(cand);
  laws.check(r_sem, "semantic");
  laws.check(r_loc, "location");

  // Random scores stand in for an untrained model in the law check.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> noise(test_set.size(), std::vector<double>(cand.size()));
  for (auto& v : noise)
    for (auto& x : v) x = u(rng);
  laws.check(evaluate_scores(test_set, noise, cand, cfg.kmax, cfg.throughput, cfg.noise_power), "random scores");

  const double secs = seconds_since(t0);
  const double m_all = r_sem.a[0] - r_loc.a[0];
  const double m_los = r_sem.a_los[0] - r_loc.a_los[0];
  const double m_nlos = r_sem.a_nlos[0] - r_loc.a_nlos[0];
  const bool ok = ds.records.size() >= 5000 && ds.sequences >= 100 && m_all >= 0.05 && r_loc.a[0] >= rnd + 0.10 &&
                  m_nlos >= m_los && secs < 900.0;
  report(7, ok,
         fmt("%zu records / %zu sequences, %zu train / %zu test samples, %zu candidates; A1 semantic %.4f location %.4f "
             "random %.4f; LOS margin %.4f NLOS margin %.4f; T1 semantic %.4f location %.4f; %.0f s (generation %.0f s)",
             ds.records.size(), ds.sequences, train_set.size(), test_set.size(), cand.size(), r_sem.a[0], r_loc.a[0], rnd,
             m_los, m_nlos, r_sem.t[0], r_loc.t[0], secs, gen_secs));
}

// 8. Collected over every evaluation above.
void criterion8() {
  report(8, laws.violations == 0 && laws.tables > 0,
         fmt("%zu evaluations checked, %zu violations%s%s", laws.tables, laws.violations, laws.violations ? "; first: " : "",
             laws.first.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Byte-identical generation and model files.
void criterion9() {
  const fs::path root = fs::temp_directory_path() / "beamsem_acceptance_repro";
  fs::remove_all(root);
  ExperimentConfig cfg;
  cfg.sequence_length = 6;
  cfg.min_count = 0;
  cfg.train.epochs = 2;
  write_dataset(generate_dataset(cfg, 12, 909, 1), root / "a");
  write_dataset(generate_dataset(cfg, 12, 909, 4), root / "b");
  const bool data_same = slurp(root / "a" / "records.jsonl") == slurp(root / "b" / "records.jsonl") &&
                         slurp(root / "a" / "manifest.txt") == slurp(root / "b" / "manifest.txt");

  const Dataset ds = read_dataset(root / "a");
  const Split split = split_by_sequence(ds.records, 0.8, 9);
  const auto idx = select_records(ds.records, split.train);
  const CandidateSet cand = candidates_from(ds.records, idx, ds.config.min_count);
  const auto samples = build_samples(ds.records, idx, ds.config, cand);
  for (const char* name : {"m1.bin", "m2.bin"}) {
    nn::BeamModel m = train_model(nn::ModelKind::semantic, samples, cand, ds.config);
    nn::save_model(m, (root / name).string());
  }
  const bool model_same = slurp(root / "m1.bin") == slurp(root / "m2.bin") && !slurp(root / "m1.bin").empty();
  fs::remove_all(root);
  report(9, data_same && model_same,
         fmt("dataset files %s, model files %s", data_same ? "identical" : "DIFFER", model_same ? "identical" : "DIFFER"));
}

}  // namespace

// Optional arguments pick a subset of criteria by number.
int main(int argc, char** argv) {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9};
  std::vector<bool> wanted(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int id = std::atoi(argv[a]);
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [criterion numbers 1-9]\n");
      return 1;
    }
    wanted[static_cast<std::size_t>(id - 1)] = true;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!wanted[i]) continue;
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
