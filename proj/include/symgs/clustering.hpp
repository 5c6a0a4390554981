#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "symgs/scene.hpp"

namespace symgs {

/// Bin counts for grouping similar-looking Gaussians. Colour is binned in
/// HSV, opacity uniformly on [0,1], and each scale axis uniformly in log
/// space over scale_range.
struct ClusterConfig {
  std::uint32_t bins_h = 8;
  std::uint32_t bins_s = 4;
  std::uint32_t bins_v = 4;
  std::uint32_t bins_opacity = 4;
  std::uint32_t bins_scale = 4;  // per axis
  /// (min, max) natural-log scale. Unset: (log 1e-4*extent, log 0.5*extent).
  std::optional<std::array<double, 2>> scale_range;

  /// Throws ConfigError for zero bins or a key space that overflows 64 bits.
  void validate() const;
  [[nodiscard]] std::array<std::uint32_t, 7> radices() const;
  [[nodiscard]] std::uint64_t key_space() const;
  [[nodiscard]] std::array<double, 2> resolved_scale_range(double extent) const;
};

using ClusterKey = std::uint64_t;

/// Bin indices in packing order: h, s, v, opacity, sx, sy, sz.
using BinIndices = std::array<std::uint32_t, 7>;

/// floor((value - lo) / (hi - lo) * bins), clamped into [0, bins - 1].
std::uint32_t uniform_bin(double value, double lo, double hi, std::uint32_t bins);

BinIndices cluster_bins(const Gaussian& g, const ClusterConfig& cfg, double extent);
ClusterKey pack_key(const BinIndices& bins, const ClusterConfig& cfg);
BinIndices unpack_key(ClusterKey key, const ClusterConfig& cfg);

ClusterKey cluster_key(const Gaussian& g, const ClusterConfig& cfg, double extent);

/// Ordered so that iteration (and hence the pair stream) is deterministic.
/// Member lists are sorted ascending.
using ClusterMap = std::map<ClusterKey, std::vector<std::uint32_t>>;

ClusterMap build_clusters(const GaussianScene& scene, const ClusterConfig& cfg,
                          std::span<const std::uint32_t> active, unsigned threads = 1);

/// Sum over clusters of C(|C_k|, 2).
std::uint64_t pair_count(const ClusterMap& clusters);

}  // namespace symgs
