#include "beamsem/harness/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "beamsem/error.hpp"

namespace beamsem::harness {

std::vector<std::size_t> rank_candidates(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

namespace {

struct Accumulator {
  std::vector<double> hits;
  std::vector<double> achieved;
  std::vector<double> optimal;
  std::size_t n = 0;

  explicit Accumulator(std::size_t k) : hits(k, 0.0), achieved(k, 0.0), optimal(k, 0.0) {}

  void finish(std::vector<double>& a, std::vector<double>& t) const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    a.assign(hits.size(), nan);
    t.assign(hits.size(), nan);
    if (n == 0) return;
    for (std::size_t k = 0; k < hits.size(); ++k) {
      a[k] = hits[k] / static_cast<double>(n);
      t[k] = optimal[k] > 0.0 ? achieved[k] / optimal[k] : 1.0;
    }
  }
};

}  // namespace

MetricsReport evaluate_scores(std::span<const nn::TrainingSample> samples, std::span<const std::vector<double>> scores,
                              const CandidateSet& candidates, int kmax, ThroughputMode mode, double noise_power,
                              std::size_t cameras) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (scores.size() != samples.size()) throw std::invalid_argument("evaluate: one score vector per sample expected");
  if (kmax < 1) throw std::invalid_argument("evaluate: kmax must be >= 1");
  const auto k_count = static_cast<std::size_t>(kmax);
  Accumulator all(k_count), los(k_count), nlos(k_count);
  std::vector<std::vector<EffectiveScatterer>> scatterers;
  scatterers.reserve(samples.size());

  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto& s = samples[n];
    if (scores[n].size() != candidates.size() || s.gains.size() != candidates.size()) {
      throw std::invalid_argument("evaluate: model output size does not match the candidate count");
    }
    scatterers.push_back(s.scatterers);
    const auto order = rank_candidates(scores[n]);
    const auto utility = [&](double y) { return mode == ThroughputMode::log2 ? std::log2(1.0 + y / noise_power) : y; };
    const double opt = utility(s.optimal_gain);
    bool hit = false;
    double best = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (k < order.size()) {
        hit = hit || candidates.pairs[order[k]] == s.optimal;
        best = std::max(best, utility(s.gains[order[k]]));
      }
      // Per-sample ratio for the mean modes; raw sums for linear_sum.
      double got = best;
      double want = opt;
      if (mode != ThroughputMode::linear_sum) {
        got = opt > 0.0 ? best / opt : 1.0;
        want = 1.0;
      }
      for (Accumulator* acc : {&all, s.is_los ? &los : &nlos}) {
        acc->hits[k] += hit ? 1.0 : 0.0;
        acc->achieved[k] += got;
        acc->optimal[k] += want;
      }
    }
    all.n++;
    (s.is_los ? los : nlos).n++;
  }

  MetricsReport r;
  all.finish(r.a, r.t);
  los.finish(r.a_los, r.t_los);
  nlos.finish(r.a_nlos, r.t_nlos);
  r.samples = all.n;
  r.los_samples = los.n;
  r.nlos_samples = nlos.n;
  r.mean_scatterers = mean_effective_scatterers(scatterers, cameras);
  return r;
}

namespace {

void write_value(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  out << format_double(v);
}

double read_value(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("metrics csv: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "K,A,T,A_los,T_los,A_nlos,T_nlos\n";
  for (std::size_t k = 0; k < report.kmax(); ++k) {
    out << k + 1;
    for (const auto* col : {&report.a, &report.t, &report.a_los, &report.t_los, &report.a_nlos, &report.t_nlos}) {
      out << ',';
      write_value(out, (*col)[k]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

MetricsReport read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "K,A,T,A_los,T_los,A_nlos,T_nlos") throw DataError("metrics csv: bad header");
  MetricsReport r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw DataError("metrics csv: expected 7 columns in '" + line + "'");
    if (read_value(cells[0]) != static_cast<double>(r.a.size() + 1)) throw DataError("metrics csv: K out of order");
    r.a.push_back(read_value(cells[1]));
    r.t.push_back(read_value(cells[2]));
    r.a_los.push_back(read_value(cells[3]));
    r.t_los.push_back(read_value(cells[4]));
    r.a_nlos.push_back(read_value(cells[5]));
    r.t_nlos.push_back(read_value(cells[6]));
  }
  return r;
}

void write_pr_csv(std::span<const PrPoint> curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "threshold,precision,recall\n";
  for (const auto& p : curve) out << format_double(p.threshold) << ',' << format_double(p.precision) << ',' << format_double(p.recall) << '\n';
}

bool same_table(const MetricsReport& a, const MetricsReport& b) {
  const auto eq = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] == y[i] || (std::isnan(x[i]) && std::isnan(y[i])))) return false;
    }
    return true;
  };
  return eq(a.a, b.a) && eq(a.t, b.t) && eq(a.a_los, b.a_los) && eq(a.t_los, b.t_los) && eq(a.a_nlos, b.a_nlos) &&
         eq(a.t_nlos, b.t_nlos);
}

}  // namespace beamsem::harness
