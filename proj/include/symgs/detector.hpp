#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "symgs/clustering.hpp"
#include "symgs/mirror.hpp"

namespace symgs {

/// Voxel sizes of the (alpha, beta, gamma) accumulator and the scene radius
/// that bounds gamma.
struct GridConfig {
  double alpha_res = 0.01;
  double beta_res = 0.01;
  double gamma_res = 0.01;
  double extent = 1.0;

  void validate() const;
};

struct GridDims {
  std::uint32_t alpha = 0, beta = 0, gamma = 0;
  [[nodiscard]] std::uint64_t voxels() const {
    return static_cast<std::uint64_t>(alpha) * beta * gamma;
  }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// d_alpha = floor(pi / alpha_res), d_beta = floor(2pi / beta_res),
/// d_gamma = floor(extent / gamma_res), each at least 1.
GridDims grid_dims(const GridConfig& g);

struct VoxelIndex {
  std::uint32_t alpha = 0, beta = 0, gamma = 0;
  friend auto operator<=>(const VoxelIndex&, const VoxelIndex&) = default;
};

/// floor(param / res) per axis, clamped into [0, dim - 1]. In the first gamma
/// slab the normal is folded into the n_x >= 0 hemisphere, so both
/// orientations of a plane through the origin share one voxel.
VoxelIndex params_to_voxel(const MirrorPlane& m, const GridConfig& g);

/// Parameters at the voxel centre.
MirrorPlane voxel_center(const VoxelIndex& v, const GridConfig& g);

class AccumulatorGrid {
 public:
  AccumulatorGrid() = default;
  explicit AccumulatorGrid(GridDims dims);

  [[nodiscard]] const GridDims& dims() const { return dims_; }
  [[nodiscard]] std::uint64_t linear(const VoxelIndex& v) const {
    return (static_cast<std::uint64_t>(v.alpha) * dims_.beta + v.beta) * dims_.gamma + v.gamma;
  }
  [[nodiscard]] VoxelIndex unlinear(std::uint64_t i) const;
  [[nodiscard]] std::uint32_t at(const VoxelIndex& v) const { return counts_[linear(v)]; }
  [[nodiscard]] std::span<const std::uint32_t> counts() const { return counts_; }
  [[nodiscard]] std::span<std::uint32_t> counts() { return counts_; }

  [[nodiscard]] std::uint64_t total() const;
  [[nodiscard]] std::uint64_t occupied() const;

  friend bool operator==(const AccumulatorGrid&, const AccumulatorGrid&) = default;

 private:
  GridDims dims_;
  std::vector<std::uint32_t> counts_;
};

enum class VoteStrategy {
  automatic,  // shards when they fit in shard_budget_bytes, otherwise atomic
  sharded,    // one private grid per worker, summed at the end
  atomic,     // one shared grid with relaxed atomic increments
};

struct VoteOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::uint64_t pair_cap = 2'000'000;  // per cluster; 0 disables the cap
  double min_separation = 0.0;         // absolute; pairs closer than this cast no vote
  VoteStrategy strategy = VoteStrategy::automatic;
  std::uint64_t max_grid_bytes = 2ull << 30;
  std::uint64_t shard_budget_bytes = 1ull << 30;
};

struct VoteStats {
  std::uint64_t pairs_total = 0;    // before the per-cluster cap
  std::uint64_t pairs_planned = 0;  // after the cap
  std::uint64_t votes = 0;
  std::uint64_t skipped_degenerate = 0;
  std::uint64_t skipped_out_of_range = 0;  // gamma > extent
};

struct VoteResult {
  AccumulatorGrid grid;
  VoteStats stats;
};

/// Classifies a pair and, when it votes, writes its voxel to `out`.
enum class PairOutcome { vote, degenerate, out_of_range };
PairOutcome pair_voxel(const Vec3& xi, const Vec3& xj, const GridConfig& g, double min_separation,
                       VoxelIndex& out);

/// Throws ConfigError (with the byte count) when the grid exceeds the budget.
void check_grid_budget(const GridDims& dims, std::uint64_t max_grid_bytes);

/// Every candidate pair votes for the voxel of its bisecting plane. The
/// result is identical for any thread count and strategy.
VoteResult accumulate_votes(std::span<const Vec3> positions, const ClusterMap& clusters, const GridConfig& g,
                            const VoteOptions& opts);

struct Peak {
  MirrorPlane mirror;  // centre of `voxel`
  VoxelIndex voxel;
  VoxelIndex region;        // centre of the winning box; equals voxel without smoothing
  std::uint64_t votes = 0;  // box-summed score when smoothing is on
};

/// Highest-count voxel; ties go to the lexicographically smallest index.
/// With `smoothing`, the box with the highest 3x3x3 sum (clipped at the grid
/// border) wins and the peak is its densest voxel.
/// nullopt when the grid is all zeros.
std::optional<Peak> argmax_mirror(const AccumulatorGrid& grid, const GridConfig& g, bool smoothing = false);

struct PartitionResult {
  std::vector<std::uint32_t> left;   // positive side, ascending
  std::vector<std::uint32_t> right;  // right[k] is the reflection partner of left[k]
  std::vector<std::uint32_t> out;    // ascending
  MirrorPlane mirror;
  std::uint64_t votes = 0;
};

struct Participants {
  std::vector<std::uint32_t> indices;  // ascending
  std::uint64_t pair_hits = 0;         // pairs that landed in the winning region
};

/// Gaussians with at least one pair quantizing into the winning voxel (or
/// its 3x3x3 neighbourhood when `neighborhood` is set).
Participants find_participants(std::span<const Vec3> positions, const ClusterMap& clusters,
                               const VoxelIndex& winner, const GridConfig& g,
                               const VoteOptions& opts, bool neighborhood = false);

/// Splits participants by side of `mirror` and keeps a one-to-one
/// left/right matching: each left participant, in ascending order, claims the
/// nearest unclaimed right participant within `match_tol` of its reflection.
/// Everything else in `active` goes to out.
PartitionResult match_bijection(std::span<const Vec3> positions, std::span<const std::uint32_t> active,
                                std::span<const std::uint32_t> participants, const MirrorPlane& mirror,
                                double match_tol);

struct PartitionOptions {
  VoteOptions vote;
  double match_tol = 0.01;
  bool neighborhood = false;
};

/// Re-scans the pair stream for the voxel of `mirror`, then enforces the
/// bijection. nullopt when no matched pair survives.
std::optional<PartitionResult> partition_by_mirror(std::span<const Vec3> positions, const ClusterMap& clusters,
                                                   std::span<const std::uint32_t> active,
                                                   const MirrorPlane& mirror, const GridConfig& g,
                                                   const PartitionOptions& opts);

}  // namespace symgs
