#include "beamsem/codebook.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "beamsem/error.hpp"

namespace beamsem {

bool CandidateSet::contains(BeamPair p) const { return std::binary_search(pairs.begin(), pairs.end(), p); }

std::optional<std::size_t> CandidateSet::index_of(BeamPair p) const {
  const auto it = std::lower_bound(pairs.begin(), pairs.end(), p);
  if (it == pairs.end() || *it != p) return std::nullopt;
  return static_cast<std::size_t>(it - pairs.begin());
}

double codebook_azimuth(std::size_t index, std::size_t size) {
  const auto c = static_cast<double>(size);
  const auto one_based = static_cast<double>(index + 1);
  return (2.0 * one_based - c - 1.0) / (2.0 * c) * std::numbers::pi;
}

Codebook build_codebook(const ArrayGeometry& geom, std::size_t size, double fixed_elevation) {
  if (size == 0) throw std::invalid_argument("build_codebook: size must be >= 1");
  Codebook cb;
  cb.geometry = geom;
  cb.fixed_elevation = fixed_elevation;
  cb.azimuths.reserve(size);
  cb.vectors.resize(static_cast<Eigen::Index>(geom.size()), static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) {
    const double az = codebook_azimuth(i, size);
    cb.azimuths.push_back(az);
    cb.vectors.col(static_cast<Eigen::Index>(i)) = steering_vector(geom, fixed_elevation, az);
  }
  return cb;
}

BeamPairGains beam_pair_gains(const ChannelMatrix& h, const Codebook& tx_cb, const Codebook& rx_cb) {
  if (h.rows() != rx_cb.vectors.rows() || h.cols() != tx_cb.vectors.rows()) {
    throw std::invalid_argument("beam_pair_gains: channel is " + std::to_string(h.rows()) + "x" +
                                std::to_string(h.cols()) + " but codebooks expect " +
                                std::to_string(rx_cb.vectors.rows()) + "x" + std::to_string(tx_cb.vectors.rows()));
  }
  const Eigen::MatrixXcd projected = rx_cb.vectors.adjoint() * h;        // C_M x N_B
  const Eigen::MatrixXcd response = projected * tx_cb.vectors;           // C_M x C_B
  return response.cwiseAbs2().transpose();
}

BeamPairGains beam_pair_gains_from_paths(std::span<const PathComponent> paths, const Codebook& tx_cb,
                                         const Codebook& rx_cb) {
  if (paths.empty()) throw NoPathsError("beam_pair_gains_from_paths");
  const auto n_tx = static_cast<Eigen::Index>(tx_cb.size());
  const auto n_rx = static_cast<Eigen::Index>(rx_cb.size());
  Eigen::MatrixXcd response = Eigen::MatrixXcd::Zero(n_tx, n_rx);
  for (const auto& p : paths) {
    const CVector ar = steering_vector(rx_cb.geometry, p.aoa_elevation, p.aoa_azimuth);
    const CVector at = steering_vector(tx_cb.geometry, p.aod_elevation, p.aod_azimuth);
    const CVector rx_proj = rx_cb.vectors.adjoint() * ar;   // w_M^j^H a_r
    const CVector tx_proj = tx_cb.vectors.adjoint() * at;   // w_B^i^H a_t = conj(a_t^H w_B^i)
    response.noalias() += p.gain * (tx_proj.conjugate() * rx_proj.transpose());
  }
  return response.cwiseAbs2();
}

namespace {

bool better(double ga, BeamPair a, double gb, BeamPair b) { return ga > gb || (ga == gb && a < b); }

std::vector<BeamPair> eligible_pairs(const BeamPairGains& gains, const CandidateSet* candidates) {
  std::vector<BeamPair> out;
  if (candidates != nullptr) {
    for (const auto& p : candidates->pairs) {
      if (p.tx < 0 || p.rx < 0 || p.tx >= gains.rows() || p.rx >= gains.cols()) {
        throw std::out_of_range("candidate pair outside the gain matrix");
      }
    }
    return candidates->pairs;
  }
  out.reserve(static_cast<std::size_t>(gains.size()));
  for (int i = 0; i < gains.rows(); ++i)
    for (int j = 0; j < gains.cols(); ++j) out.push_back({i, j});
  return out;
}

}  // namespace

BeamPair optimal_pair(const BeamPairGains& gains, const CandidateSet* candidates) {
  if (gains.size() == 0) throw std::invalid_argument("optimal_pair: empty gain matrix");
  if (candidates != nullptr) {
    if (candidates->pairs.empty()) throw std::invalid_argument("optimal_pair: empty candidate set");
    BeamPair best = candidates->pairs.front();
    for (const auto& p : eligible_pairs(gains, candidates)) {
      if (better(gains(p.tx, p.rx), p, gains(best.tx, best.rx), best)) best = p;
    }
    return best;
  }
  BeamPair best{0, 0};
  double best_gain = gains(0, 0);
  for (int i = 0; i < gains.rows(); ++i) {
    for (int j = 0; j < gains.cols(); ++j) {
      if (gains(i, j) > best_gain) {
        best_gain = gains(i, j);
        best = {i, j};
      }
    }
  }
  return best;
}

std::vector<BeamPair> top_k_pairs(const BeamPairGains& gains, std::size_t k, const CandidateSet* candidates) {
  auto pairs = eligible_pairs(gains, candidates);
  if (k < 1 || k > pairs.size()) {
    throw std::out_of_range("top_k_pairs: k=" + std::to_string(k) + " outside [1, " + std::to_string(pairs.size()) +
                            "]");
  }
  const auto order = [&](BeamPair a, BeamPair b) { return better(gains(a.tx, a.rx), a, gains(b.tx, b.rx), b); };
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(k), pairs.end(), order);
  pairs.resize(k);
  return pairs;
}

CandidateSet build_candidate_set(std::span<const BeamPair> labels, int min_count) {
  if (labels.empty()) throw std::invalid_argument("build_candidate_set: no labels");
  std::map<BeamPair, int> counts;
  for (const auto& p : labels) ++counts[p];
  CandidateSet out;
  out.min_count = min_count;
  for (const auto& [pair, count] : counts) {
    if (count > min_count) out.pairs.push_back(pair);
  }
  if (out.pairs.empty()) {
    throw std::invalid_argument("build_candidate_set: no pair was optimal more than " + std::to_string(min_count) +
                                " times; use a lower min_count");
  }
  return out;
}

}  // namespace beamsem
