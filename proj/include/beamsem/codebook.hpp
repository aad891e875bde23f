#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "beamsem/channel.hpp"

namespace beamsem {

/// Fixed-elevation beam codebook. Beam i (0-based) steers to azimuth
/// (2(i+1) - C - 1) / (2C) * pi, i.e. a symmetric grid over (-pi/2, pi/2).
struct Codebook {
  ArrayGeometry geometry;
  double fixed_elevation = 0.0;
  std::vector<double> azimuths;
  /// N x C, one unit-norm beam per column.
  Eigen::MatrixXcd vectors;

  [[nodiscard]] std::size_t size() const { return azimuths.size(); }
};

/// Real C_B x C_M matrix; entry (i, j) is the power gain of tx beam i with rx beam j.
using BeamPairGains = Eigen::MatrixXd;

/// Zero-based (tx beam, rx beam) index pair. Ordered lexicographically, which
/// is also the tie-break order for every selection routine.
struct BeamPair {
  int tx = 0;
  int rx = 0;
  auto operator<=>(const BeamPair&) const = default;
};

/// Beam pairs a predictor is allowed to output, sorted ascending.
struct CandidateSet {
  std::vector<BeamPair> pairs;
  int min_count = 0;

  [[nodiscard]] std::size_t size() const { return pairs.size(); }
  [[nodiscard]] bool contains(BeamPair p) const;
  /// Position of `p` in `pairs`, or nullopt.
  [[nodiscard]] std::optional<std::size_t> index_of(BeamPair p) const;
};

[[nodiscard]] double codebook_azimuth(std::size_t index, std::size_t size);

[[nodiscard]] Codebook build_codebook(const ArrayGeometry& geom, std::size_t size, double fixed_elevation);

/// |w_M^j^H H w_B^i|^2 over all pairs. The receive side is projected first
/// (W_M^H H), then multiplied by the transmit codebook.
[[nodiscard]] BeamPairGains beam_pair_gains(const ChannelMatrix& h, const Codebook& tx_cb, const Codebook& rx_cb);

/// Same quantity evaluated directly from the path list without forming H:
/// w_M^H H w_B = sum_p gain_p (w_M^H a_r,p)(a_t,p^H w_B). Cost is linear in
/// the number of paths instead of quadratic in the array size.
[[nodiscard]] BeamPairGains beam_pair_gains_from_paths(std::span<const PathComponent> paths, const Codebook& tx_cb,
                                                       const Codebook& rx_cb);

[[nodiscard]] BeamPair optimal_pair(const BeamPairGains& gains, const CandidateSet* candidates = nullptr);

/// The k best pairs in non-increasing gain order, ties broken by the
/// smaller (tx, rx). Throws std::out_of_range unless 1 <= k <= eligible pairs.
[[nodiscard]] std::vector<BeamPair> top_k_pairs(const BeamPairGains& gains, std::size_t k,
                                                const CandidateSet* candidates = nullptr);

/// Pairs that were optimal strictly more than `min_count` times.
[[nodiscard]] CandidateSet build_candidate_set(std::span<const BeamPair> labels, int min_count);

}  // namespace beamsem
