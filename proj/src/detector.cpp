#include "symgs/detector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "symgs/errors.hpp"
#include "symgs/kdtree.hpp"
#include "symgs/pairs.hpp"
#include "symgs/parallel.hpp"

namespace symgs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kChunkPairs = 1u << 16;

std::uint32_t dim_of(double range, double res) {
  const double ratio = range / res;
  // Guard ratios that are integral in exact arithmetic but land a hair below.
  const double d = std::floor(ratio * (1.0 + 1e-12));
  return static_cast<std::uint32_t>(std::max(1.0, d));
}

std::uint32_t axis_index(double value, double res, std::uint32_t dim) {
  const double t = std::floor(value / res);
  if (!(t > 0.0)) return 0;
  if (t >= static_cast<double>(dim - 1)) return dim - 1;
  return static_cast<std::uint32_t>(t);
}

}  // namespace

void GridConfig::validate() const {
  if (!(alpha_res > 0.0) || !(beta_res > 0.0) || !(gamma_res > 0.0)) {
    throw ConfigError("grid resolutions must be positive");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid extent must be positive and finite");
}

GridDims grid_dims(const GridConfig& g) {
  g.validate();
  return {dim_of(kPi, g.alpha_res), dim_of(2.0 * kPi, g.beta_res), dim_of(g.extent, g.gamma_res)};
}

VoxelIndex params_to_voxel(const MirrorPlane& m, const GridConfig& g) {
  const GridDims d = grid_dims(g);
  const std::uint32_t ig = axis_index(m.gamma, g.gamma_res, d.gamma);
  double alpha = m.alpha;
  double beta = m.beta;
  if (ig == 0 && alpha > 0.5 * kPi) {
    // Both normals of a plane near the origin have gamma ~ 0; keep the one with n_x >= 0.
    alpha = kPi - alpha;
    beta = beta < kPi ? beta + kPi : beta - kPi;
  }
  return {axis_index(alpha, g.alpha_res, d.alpha), axis_index(beta, g.beta_res, d.beta), ig};
}

MirrorPlane voxel_center(const VoxelIndex& v, const GridConfig& g) {
  return {(v.alpha + 0.5) * g.alpha_res, (v.beta + 0.5) * g.beta_res, (v.gamma + 0.5) * g.gamma_res};
}

AccumulatorGrid::AccumulatorGrid(GridDims dims) : dims_(dims), counts_(dims.voxels(), 0u) {}

VoxelIndex AccumulatorGrid::unlinear(std::uint64_t i) const {
  VoxelIndex v;
  v.gamma = static_cast<std::uint32_t>(i % dims_.gamma);
  i /= dims_.gamma;
  v.beta = static_cast<std::uint32_t>(i % dims_.beta);
  v.alpha = static_cast<std::uint32_t>(i / dims_.beta);
  return v;
}

std::uint64_t AccumulatorGrid::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t AccumulatorGrid::occupied() const {
  return static_cast<std::uint64_t>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
}

PairOutcome pair_voxel(const Vec3& xi, const Vec3& xj, const GridConfig& g, double min_separation,
                       VoxelIndex& out) {
  const auto plane = plane_from_pair(xi, xj, min_separation);
  if (!plane) return PairOutcome::degenerate;
  const MirrorPlane m = plane_to_params(plane->center, plane->normal);
  if (m.gamma > g.extent) return PairOutcome::out_of_range;
  out = params_to_voxel(m, g);
  return PairOutcome::vote;
}

void check_grid_budget(const GridDims& dims, std::uint64_t max_grid_bytes) {
  const std::uint64_t bytes = dims.voxels() * sizeof(std::uint32_t);
  if (max_grid_bytes > 0 && bytes > max_grid_bytes) {
    throw ConfigError("accumulator grid " + std::to_string(dims.alpha) + "x" + std::to_string(dims.beta) + "x" +
                      std::to_string(dims.gamma) + " needs " + std::to_string(bytes) + " bytes, budget is " +
                      std::to_string(max_grid_bytes));
  }
}

VoteResult accumulate_votes(std::span<const Vec3> positions, const ClusterMap& clusters, const GridConfig& g,
                            const VoteOptions& opts) {
  const GridDims dims = grid_dims(g);
  check_grid_budget(dims, opts.max_grid_bytes);

  const PairPlan plan(clusters, opts.pair_cap, opts.seed);
  const auto chunks = plan.chunks(kChunkPairs);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(opts.threads), std::max<std::size_t>(1, chunks.size())));
  const std::uint64_t grid_bytes = dims.voxels() * sizeof(std::uint32_t);

  VoteStrategy strategy = opts.strategy;
  if (strategy == VoteStrategy::automatic) {
    strategy = static_cast<std::uint64_t>(workers) * grid_bytes <= opts.shard_budget_bytes ? VoteStrategy::sharded
                                                                                          : VoteStrategy::atomic;
  }
  if (workers == 1) strategy = VoteStrategy::sharded;

  VoteResult result{AccumulatorGrid(dims), {}};
  std::vector<AccumulatorGrid> shards;
  if (strategy == VoteStrategy::sharded && workers > 1) {
    shards.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) shards.emplace_back(dims);
  }
  std::vector<VoteStats> worker_stats(workers);

  parallel_tasks(chunks.size(), workers, [&](std::size_t t, unsigned w) {
    VoteStats& st = worker_stats[w];
    std::span<std::uint32_t> counts =
        (strategy == VoteStrategy::sharded && w > 0) ? shards[w - 1].counts() : result.grid.counts();
    const bool use_atomic = strategy == VoteStrategy::atomic && workers > 1;
    const AccumulatorGrid& layout = result.grid;
    plan.for_each(chunks[t], [&](std::uint32_t a, std::uint32_t b) {
      VoxelIndex v;
      switch (pair_voxel(positions[a], positions[b], g, opts.min_separation, v)) {
        case PairOutcome::degenerate:
          ++st.skipped_degenerate;
          return;
        case PairOutcome::out_of_range:
          ++st.skipped_out_of_range;
          return;
        case PairOutcome::vote:
          break;
      }
      const std::uint64_t idx = layout.linear(v);
      if (use_atomic) {
        std::atomic_ref<std::uint32_t>(counts[idx]).fetch_add(1, std::memory_order_relaxed);
      } else {
        ++counts[idx];
      }
      ++st.votes;
    });
  });

  auto merged = result.grid.counts();
  for (const auto& shard : shards) {
    const auto src = shard.counts();
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += src[i];
  }

  result.stats.pairs_total = plan.total_pairs();
  result.stats.pairs_planned = plan.planned_pairs();
  for (const auto& st : worker_stats) {
    result.stats.votes += st.votes;
    result.stats.skipped_degenerate += st.skipped_degenerate;
    result.stats.skipped_out_of_range += st.skipped_out_of_range;
  }
  return result;
}

namespace {

/// In-place 3-wide box sum along one axis of a row-major (a, b, c) array.
void box_sum_axis(const std::vector<std::uint64_t>& src, std::vector<std::uint64_t>& dst, const GridDims& d,
                  int axis) {
  const std::uint64_t stride = axis == 0 ? static_cast<std::uint64_t>(d.beta) * d.gamma : axis == 1 ? d.gamma : 1;
  const std::uint32_t len = axis == 0 ? d.alpha : axis == 1 ? d.beta : d.gamma;
  for (std::uint64_t i = 0; i < src.size(); ++i) {
    const std::uint32_t pos = static_cast<std::uint32_t>((i / stride) % len);
    std::uint64_t s = src[i];
    if (pos > 0) s += src[i - stride];
    if (pos + 1 < len) s += src[i + stride];
    dst[i] = s;
  }
}

}  // namespace

std::optional<Peak> argmax_mirror(const AccumulatorGrid& grid, const GridConfig& g, bool smoothing) {
  const auto counts = grid.counts();
  if (counts.empty()) return std::nullopt;

  std::uint64_t best = 0;
  std::uint64_t best_idx = 0;
  if (!smoothing) {
    for (std::uint64_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > best) {
        best = counts[i];
        best_idx = i;
      }
    }
  } else {
    std::vector<std::uint64_t> a(counts.begin(), counts.end());
    std::vector<std::uint64_t> b(a.size());
    box_sum_axis(a, b, grid.dims(), 2);
    box_sum_axis(b, a, grid.dims(), 1);
    box_sum_axis(a, b, grid.dims(), 0);
    for (std::uint64_t i = 0; i < b.size(); ++i) {
      if (b[i] > best) {
        best = b[i];
        best_idx = i;
      }
    }
  }
  if (best == 0) return std::nullopt;
  const VoxelIndex region = grid.unlinear(best_idx);
  VoxelIndex v = region;
  if (smoothing) {
    const GridDims& d = grid.dims();
    const auto lo = [](std::uint32_t x) { return x == 0 ? 0u : x - 1; };
    std::uint32_t densest = 0;
    for (std::uint32_t a = lo(region.alpha); a <= std::min(region.alpha + 1, d.alpha - 1); ++a)
      for (std::uint32_t b = lo(region.beta); b <= std::min(region.beta + 1, d.beta - 1); ++b)
        for (std::uint32_t c = lo(region.gamma); c <= std::min(region.gamma + 1, d.gamma - 1); ++c) {
          const VoxelIndex w{a, b, c};
          if (grid.at(w) > densest) {
            densest = grid.at(w);
            v = w;
          }
        }
  }
  return Peak{voxel_center(v, g), v, region, best};
}

namespace {

bool in_region(const VoxelIndex& v, const VoxelIndex& w, bool neighborhood) {
  if (!neighborhood) return v == w;
  const auto near = [](std::uint32_t a, std::uint32_t b) { return (a > b ? a - b : b - a) <= 1; };
  return near(v.alpha, w.alpha) && near(v.beta, w.beta) && near(v.gamma, w.gamma);
}

}  // namespace

Participants find_participants(std::span<const Vec3> positions, const ClusterMap& clusters,
                               const VoxelIndex& winner, const GridConfig& g, const VoteOptions& opts,
                               bool neighborhood) {
  const PairPlan plan(clusters, opts.pair_cap, opts.seed);
  std::vector<bool> marked(positions.size(), false);
  Participants result;
  plan.for_each([&](std::uint32_t a, std::uint32_t b) {
    VoxelIndex v;
    if (pair_voxel(positions[a], positions[b], g, opts.min_separation, v) != PairOutcome::vote) return;
    if (!in_region(v, winner, neighborhood)) return;
    marked[a] = true;
    marked[b] = true;
    ++result.pair_hits;
  });
  for (std::uint32_t i = 0; i < marked.size(); ++i) {
    if (marked[i]) result.indices.push_back(i);
  }
  return result;
}

PartitionResult match_bijection(std::span<const Vec3> positions, std::span<const std::uint32_t> active,
                                std::span<const std::uint32_t> participants, const MirrorPlane& mirror,
                                double match_tol) {
  std::vector<std::uint32_t> left_candidates;
  std::vector<std::uint32_t> right_candidates;
  for (const std::uint32_t i : participants) {
    const double sd = mirror.signed_distance(positions[i]);
    if (sd > 0.0) {
      left_candidates.push_back(i);
    } else if (sd < 0.0) {
      right_candidates.push_back(i);
    }
  }
  std::sort(left_candidates.begin(), left_candidates.end());
  std::sort(right_candidates.begin(), right_candidates.end());

  std::vector<Vec3> right_pos;
  right_pos.reserve(right_candidates.size());
  for (const auto i : right_candidates) right_pos.push_back(positions[i]);
  const KdTree tree(right_pos);

  PartitionResult result;
  result.mirror = mirror;
  std::vector<bool> claimed(right_candidates.size(), false);
  for (const std::uint32_t l : left_candidates) {
    const Vec3 q = reflect_point(positions[l], mirror);
    for (const Neighbor& nb : tree.within(q, match_tol)) {
      if (claimed[nb.index]) continue;
      claimed[nb.index] = true;
      result.left.push_back(l);
      result.right.push_back(right_candidates[nb.index]);
      break;
    }
  }

  std::vector<bool> taken(positions.size(), false);
  for (const auto i : result.left) taken[i] = true;
  for (const auto i : result.right) taken[i] = true;
  for (const auto i : active) {
    if (!taken[i]) result.out.push_back(i);
  }
  std::sort(result.out.begin(), result.out.end());
  return result;
}

std::optional<PartitionResult> partition_by_mirror(std::span<const Vec3> positions, const ClusterMap& clusters,
                                                   std::span<const std::uint32_t> active,
                                                   const MirrorPlane& mirror, const GridConfig& g,
                                                   const PartitionOptions& opts) {
  const VoxelIndex winner = params_to_voxel(mirror, g);
  const Participants p = find_participants(positions, clusters, winner, g, opts.vote, opts.neighborhood);
  PartitionResult result = match_bijection(positions, active, p.indices, mirror, opts.match_tol);
  if (result.left.empty()) return std::nullopt;
  result.votes = p.pair_hits;
  return result;
}

}  // namespace symgs
