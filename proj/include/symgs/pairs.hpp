#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "symgs/clustering.hpp"

namespace symgs {

/// Rank of the unordered pair (i, j), i < j, among the n(n-1)/2 pairs of n
/// items in row-major order (0,1), (0,2), ..., (0,n-1), (1,2), ...
std::uint64_t pair_rank(std::uint64_t i, std::uint64_t j, std::uint64_t n);
std::pair<std::uint64_t, std::uint64_t> pair_from_rank(std::uint64_t rank, std::uint64_t n);

/// The candidate pairs of a cluster map, as a deterministic stream.
///
/// Clusters are visited in key order. A cluster whose pair count exceeds
/// `pair_cap` is replaced by `pair_cap` distinct pairs drawn uniformly with
/// an RNG seeded from (seed, cluster key), so the stream depends only on the
/// clusters, the cap and the seed. Voting and partitioning walk the same
/// stream.
///
/// Holds views into the ClusterMap member lists; the map must outlive the plan.
class PairPlan {
 public:
  PairPlan(const ClusterMap& clusters, std::uint64_t pair_cap, std::uint64_t seed);

  /// Pairs before capping.
  [[nodiscard]] std::uint64_t total_pairs() const { return total_; }
  /// Pairs actually streamed.
  [[nodiscard]] std::uint64_t planned_pairs() const { return planned_; }
  [[nodiscard]] bool subsampled() const { return planned_ != total_; }

  /// A contiguous slice of one cluster's stream.
  struct Chunk {
    std::uint32_t group;
    std::uint64_t begin, end;
  };
  [[nodiscard]] std::vector<Chunk> chunks(std::uint64_t max_pairs_per_chunk) const;

  /// Calls f(a, b) with scene indices for every pair in the chunk; a precedes b
  /// in the cluster's member order.
  template <typename F>
  void for_each(const Chunk& c, F&& f) const {
    const Group& g = groups_[c.group];
    const std::uint64_t n = g.members.size();
    if (g.sampled.empty()) {
      if (c.begin >= c.end) return;
      auto [i, j] = pair_from_rank(c.begin, n);
      for (std::uint64_t r = c.begin; r < c.end; ++r) {
        f(g.members[i], g.members[j]);
        if (++j == n) {
          ++i;
          j = i + 1;
        }
      }
    } else {
      for (std::uint64_t r = c.begin; r < c.end; ++r) {
        const auto [i, j] = pair_from_rank(g.sampled[r], n);
        f(g.members[i], g.members[j]);
      }
    }
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint32_t gi = 0; gi < groups_.size(); ++gi) for_each(Chunk{gi, 0, groups_[gi].count}, f);
  }

 private:
  struct Group {
    std::span<const std::uint32_t> members;
    std::vector<std::uint64_t> sampled;  // sorted ranks; empty = every pair
    std::uint64_t count = 0;
  };
  std::vector<Group> groups_;
  std::uint64_t total_ = 0;
  std::uint64_t planned_ = 0;
};

}  // namespace symgs
