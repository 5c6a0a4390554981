#include "symgs/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace symgs {

std::uint64_t pair_rank(std::uint64_t i, std::uint64_t j, std::uint64_t n) {
  // Pairs in rows before i: sum_{r<i} (n - 1 - r) = i*(2n - i - 1)/2.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::pair<std::uint64_t, std::uint64_t> pair_from_rank(std::uint64_t rank, std::uint64_t n) {
  // Rows counted from the end: the last k rows hold k(k+1)/2 pairs.
  const std::uint64_t total = n * (n - 1) / 2;
  const std::uint64_t rev = total - 1 - rank;
  auto k = static_cast<std::uint64_t>((std::sqrt(8.0L * static_cast<long double>(rev) + 1.0L) - 1.0L) / 2.0L);
  while (k * (k + 1) / 2 > rev) --k;
  while ((k + 1) * (k + 2) / 2 <= rev) ++k;
  const std::uint64_t i = n - 2 - k;
  const std::uint64_t row_start = i * (2 * n - i - 1) / 2;
  return {i, i + 1 + (rank - row_start)};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Floyd's algorithm: `k` distinct values from [0, n), sorted.
std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::uint64_t> dist(0, j);
    const std::uint64_t t = dist(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PairPlan::PairPlan(const ClusterMap& clusters, std::uint64_t pair_cap, std::uint64_t seed) {
  for (const auto& [key, members] : clusters) {
    const std::uint64_t n = members.size();
    if (n < 2) continue;
    const std::uint64_t pairs = n * (n - 1) / 2;
    Group g;
    g.members = std::span<const std::uint32_t>(members);
    total_ += pairs;
    if (pair_cap > 0 && pairs > pair_cap) {
      g.sampled = sample_distinct(pairs, pair_cap, splitmix64(seed ^ splitmix64(key)));
      g.count = pair_cap;
    } else {
      g.count = pairs;
    }
    planned_ += g.count;
    groups_.push_back(std::move(g));
  }
}

std::vector<PairPlan::Chunk> PairPlan::chunks(std::uint64_t max_pairs_per_chunk) const {
  const std::uint64_t step = std::max<std::uint64_t>(1, max_pairs_per_chunk);
  std::vector<Chunk> out;
  for (std::uint32_t gi = 0; gi < groups_.size(); ++gi) {
    for (std::uint64_t b = 0; b < groups_[gi].count; b += step) {
      out.push_back({gi, b, std::min(groups_[gi].count, b + step)});
    }
  }
  return out;
}

}  // namespace symgs
