#include "symgs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "symgs/color.hpp"
#include "symgs/errors.hpp"
#include "symgs/parallel.hpp"

namespace symgs {

std::array<std::uint32_t, 7> ClusterConfig::radices() const {
  return {bins_h, bins_s, bins_v, bins_opacity, bins_scale, bins_scale, bins_scale};
}

void ClusterConfig::validate() const {
  for (auto r : radices()) {
    if (r == 0) throw ConfigError("clustering bin counts must be >= 1");
  }
  std::uint64_t space = 1;
  for (auto r : radices()) {
    if (space > std::numeric_limits<std::uint64_t>::max() / r) {
      throw ConfigError("clustering key space exceeds 64 bits");
    }
    space *= r;
  }
  if (scale_range && !((*scale_range)[0] < (*scale_range)[1])) {
    throw ConfigError("clustering scale_range must satisfy min < max");
  }
}

std::uint64_t ClusterConfig::key_space() const {
  validate();
  std::uint64_t space = 1;
  for (auto r : radices()) space *= r;
  return space;
}

std::array<double, 2> ClusterConfig::resolved_scale_range(double extent) const {
  if (scale_range) return *scale_range;
  const double e = extent > 0.0 ? extent : 1.0;
  return {std::log(1e-4 * e), std::log(0.5 * e)};
}

std::uint32_t uniform_bin(double value, double lo, double hi, std::uint32_t bins) {
  if (bins <= 1 || !(hi > lo)) return 0;
  const double t = (value - lo) / (hi - lo) * static_cast<double>(bins);
  if (!(t > 0.0)) return 0;  // also catches NaN
  const auto idx = static_cast<std::uint64_t>(std::floor(t));
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(idx, bins - 1));
}

BinIndices cluster_bins(const Gaussian& g, const ClusterConfig& cfg, double extent) {
  const Hsv hsv = rgb_to_hsv(dc_to_rgb(g.color_dc));
  const auto [lo, hi] = cfg.resolved_scale_range(extent);
  BinIndices b{};
  b[0] = uniform_bin(hsv[0], 0.0, 1.0, cfg.bins_h);
  b[1] = uniform_bin(hsv[1], 0.0, 1.0, cfg.bins_s);
  b[2] = uniform_bin(hsv[2], 0.0, 1.0, cfg.bins_v);
  b[3] = uniform_bin(g.opacity(), 0.0, 1.0, cfg.bins_opacity);
  for (int k = 0; k < 3; ++k) {
    const double ls = std::clamp(static_cast<double>(g.log_scale[k]), lo, hi);
    b[4 + k] = uniform_bin(ls, lo, hi, cfg.bins_scale);
  }
  return b;
}

ClusterKey pack_key(const BinIndices& bins, const ClusterConfig& cfg) {
  const auto radix = cfg.radices();
  ClusterKey key = 0;
  for (int k = 0; k < 7; ++k) key = key * radix[k] + bins[k];
  return key;
}

BinIndices unpack_key(ClusterKey key, const ClusterConfig& cfg) {
  const auto radix = cfg.radices();
  BinIndices b{};
  for (int k = 6; k >= 0; --k) {
    b[k] = static_cast<std::uint32_t>(key % radix[k]);
    key /= radix[k];
  }
  return b;
}

ClusterKey cluster_key(const Gaussian& g, const ClusterConfig& cfg, double extent) {
  return pack_key(cluster_bins(g, cfg, extent), cfg);
}

ClusterMap build_clusters(const GaussianScene& scene, const ClusterConfig& cfg,
                          std::span<const std::uint32_t> active, unsigned threads) {
  cfg.validate();
  std::vector<ClusterKey> keys(active.size());
  constexpr std::size_t kChunk = 4096;
  const std::size_t tasks = (active.size() + kChunk - 1) / kChunk;
  parallel_tasks(tasks, resolve_threads(threads), [&](std::size_t t, unsigned) {
    const std::size_t end = std::min(active.size(), (t + 1) * kChunk);
    for (std::size_t i = t * kChunk; i < end; ++i) {
      if (active[i] >= scene.size()) {
        throw std::out_of_range("active index " + std::to_string(active[i]) + " outside scene");
      }
      keys[i] = cluster_key(scene.gaussians[active[i]], cfg, scene.extent);
    }
  });

  ClusterMap clusters;
  for (std::size_t i = 0; i < active.size(); ++i) clusters[keys[i]].push_back(active[i]);
  for (auto& [key, members] : clusters) std::sort(members.begin(), members.end());
  return clusters;
}

std::uint64_t pair_count(const ClusterMap& clusters) {
  std::uint64_t total = 0;
  for (const auto& [key, members] : clusters) {
    const std::uint64_t n = members.size();
    total += n * (n - (n > 0 ? 1 : 0)) / 2;
  }
  return total;
}

}  // namespace symgs
