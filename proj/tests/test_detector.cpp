#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symgs/detector.hpp"
#include "symgs/errors.hpp"
#include "symgs/synthetic.hpp"

using namespace symgs;

namespace {

constexpr double kPi = std::numbers::pi;

GaussianScene line_scene(const std::vector<Vec3>& pts) {
  std::vector<Gaussian> gs;
  for (const auto& p : pts) {
    Gaussian g;
    g.position = p;
    gs.push_back(g);
  }
  return make_scene(gs);
}

ClusterMap one_cluster(std::size_t n) {
  ClusterMap m;
  for (std::uint32_t i = 0; i < n; ++i) m[0].push_back(i);
  return m;
}

std::vector<std::uint32_t> iota(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

const std::vector<Vec3> kFour{{1, 0, 0}, {-1, 0, 0}, {2, 0, 0}, {-2, 0, 0}};

}  // namespace

TEST_CASE("grid dimensions") {
  const GridDims d = grid_dims({0.01, 0.01, 0.01, 2.0});
  CHECK(d.alpha == 314);
  CHECK(d.beta == 628);
  CHECK(d.gamma == 200);
  CHECK(grid_dims({10.0, 10.0, 10.0, 1.0}) == GridDims{1, 1, 1});
  CHECK_THROWS_AS(grid_dims({0.0, 0.01, 0.01, 1.0}), ConfigError);
}

TEST_CASE("voxel indices floor and clamp") {
  const GridConfig g{0.01, 0.01, 0.01, 1.0};
  CHECK(params_to_voxel({kPi / 2, 1.0, 0.5}, g).alpha == 157);
  CHECK(params_to_voxel({0.3, 1.0, 1.0}, g).gamma == 99);
  // 2*pi - 1e-12 sits in the last beta cell, index 627 of 628.
  CHECK(params_to_voxel({0.3, 2 * kPi - 1e-12, 0.5}, g).beta == 627);
  CHECK(params_to_voxel({kPi, 0.0, 0.5}, g).alpha == 313);
}

TEST_CASE("planes through the origin vote into one voxel for either normal") {
  const GridConfig g{0.01, 0.01, 0.01, 1.0};
  const MirrorPlane a = MirrorPlane::from_normal_offset({0.3, 0.5, -0.2}, 0.0);
  const MirrorPlane b = MirrorPlane::from_normal_offset({-0.3, -0.5, 0.2}, 0.0);
  CHECK(params_to_voxel(a, g) == params_to_voxel(b, g));
}

TEST_CASE("four collinear points") {
  const auto scene = line_scene(kFour);
  REQUIRE(scene.extent == 2.0);
  const GridConfig g{0.01, 0.01, 0.01, scene.extent};
  const auto pos = scene.positions();
  const auto clusters = one_cluster(4);
  const VoteResult r = accumulate_votes(pos, clusters, g, {});
  CHECK(r.stats.pairs_total == 6);
  CHECK(r.stats.votes == 6);
  CHECK(r.grid.total() == 6);
  CHECK(r.grid.at({0, 314, 0}) == 2);
  CHECK(r.grid.at({0, 314, 150}) == 1);
  CHECK(r.grid.at({0, 314, 50}) == 1);
  CHECK(r.grid.at({313, 314, 150}) == 1);
  CHECK(r.grid.at({313, 314, 50}) == 1);

  const auto peak = argmax_mirror(r.grid, g);
  REQUIRE(peak);
  CHECK(peak->votes == 2);
  CHECK(peak->voxel == VoxelIndex{0, 314, 0});
  CHECK(peak->mirror.alpha == doctest::Approx(0.005));
  CHECK(peak->mirror.beta == doctest::Approx(3.145));
  CHECK(peak->mirror.gamma == doctest::Approx(0.005));

  // Reflections across the voxel centre land ~0.014 from their partners, so
  // matching needs a tolerance above the voxel size.
  PartitionOptions po;
  po.match_tol = 0.05;
  auto p = partition_by_mirror(pos, clusters, iota(4), peak->mirror, g, po);
  REQUIRE(p);
  CHECK(p->left == std::vector<std::uint32_t>{0, 2});
  CHECK(p->right == std::vector<std::uint32_t>{1, 3});
  CHECK(p->out.empty());
  CHECK(p->votes == 2);

  po.match_tol = 0.01;
  CHECK_FALSE(partition_by_mirror(pos, clusters, iota(4), peak->mirror, g, po));

  // A fifth point in its own cluster is never paired.
  auto five = kFour;
  five.push_back({0, 0, 5});
  const auto scene5 = line_scene(five);
  const GridConfig g5{0.01, 0.01, 0.01, scene5.extent};
  const auto pos5 = scene5.positions();
  const auto c5 = one_cluster(4);
  const auto r5 = accumulate_votes(pos5, c5, g5, {});
  const auto peak5 = argmax_mirror(r5.grid, g5);
  REQUIRE(peak5);
  po.match_tol = 0.05;
  auto p5 = partition_by_mirror(pos5, c5, iota(5), peak5->mirror, g5, po);
  REQUIRE(p5);
  CHECK(p5->out == std::vector<std::uint32_t>{4});
}

TEST_CASE("empty clusters and single pairs") {
  const GridConfig g{0.01, 0.01, 0.01, 1.0};
  const std::vector<Vec3> pos{{0.5, 0, 0}, {-0.5, 0.1, 0}};
  const VoteResult empty = accumulate_votes(pos, {}, g, {});
  CHECK(empty.grid.total() == 0);
  CHECK_FALSE(argmax_mirror(empty.grid, g));
  const VoteResult one = accumulate_votes(pos, one_cluster(2), g, {});
  CHECK(one.grid.total() == 1);
  CHECK(one.grid.occupied() == 1);
}

TEST_CASE("argmax ties go to the smallest index") {
  const GridConfig g{0.5, 0.5, 0.5, 1.0};
  AccumulatorGrid grid(grid_dims(g));
  grid.counts()[grid.linear({3, 1, 1})] = 4;
  grid.counts()[grid.linear({1, 5, 0})] = 4;
  grid.counts()[grid.linear({1, 4, 1})] = 4;
  const auto peak = argmax_mirror(grid, g);
  REQUIRE(peak);
  CHECK(peak->voxel == VoxelIndex{1, 4, 1});
}

TEST_CASE("smoothing favours a spread cluster of votes") {
  const GridConfig g{0.1, 0.1, 0.1, 1.0};
  AccumulatorGrid grid(grid_dims(g));
  grid.counts()[grid.linear({20, 3, 3})] = 5;
  for (std::uint32_t a = 9; a <= 11; ++a) grid.counts()[grid.linear({a, 30, 5})] = 3;
  CHECK(argmax_mirror(grid, g)->voxel == VoxelIndex{20, 3, 3});
  const auto smooth = argmax_mirror(grid, g, true);
  // Every box that contains the whole line scores 9; the smallest index wins.
  CHECK(smooth->region == VoxelIndex{10, 29, 4});
  CHECK(smooth->voxel == VoxelIndex{9, 30, 5});
  CHECK(smooth->votes == 9);
}

TEST_CASE("degenerate and out-of-range pairs are skipped") {
  const GridConfig g{0.01, 0.01, 0.01, 1.0};
  const std::vector<Vec3> pos{{0.9, 0, 0}, {0.9, 0, 0}, {1.5, 0, 0}, {1.7, 0, 0}};
  VoteOptions o;
  o.min_separation = 1e-6;
  ClusterMap c;
  c[0] = {0, 1};
  c[1] = {2, 3};
  const auto r = accumulate_votes(pos, c, g, o);
  CHECK(r.stats.skipped_degenerate == 1);
  CHECK(r.stats.skipped_out_of_range == 1);
  CHECK(r.grid.total() == 0);
}

TEST_CASE("grid budget is enforced with the byte count") {
  const GridConfig g{0.001, 0.001, 0.001, 10.0};
  VoteOptions o;
  o.max_grid_bytes = 1 << 20;
  try {
    accumulate_votes(std::vector<Vec3>{}, {}, g, o);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const auto bytes = std::to_string(grid_dims(g).voxels() * 4);
    CHECK(std::string(e.what()).find(bytes) != std::string::npos);
  }
}

TEST_CASE("voting matches the naive double loop for every strategy and thread count") {
  const std::vector<ClusterConfig> configs{{}, {1, 1, 1, 1, 1, {}}, {4, 2, 2, 2, 1, {}}};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed);
    SyntheticSpec spec;
    spec.base_count = 150;
    spec.mirrors = {{random_mirror(rng, 1.0), 0.7}};
    spec.noise_sigma = 0.01;
    spec.profile = seed % 2 ? AttributeProfile::uniform : AttributeProfile::k_color;
    spec.seed = seed;
    const auto s = gen_synthetic(spec).scene;
    const auto pos = s.positions();
    for (const auto& cc : configs) {
      for (const double gres : {0.01, 0.1}) {
        const GridConfig g{0.01, 0.01, gres, s.extent};
        const auto expect = oracle::naive_votes(s, cc, 0.01, 0.01, gres, 1e-6 * s.extent);
        const auto clusters = build_clusters(s, cc, iota(s.size()));
        for (const auto strategy : {VoteStrategy::sharded, VoteStrategy::atomic}) {
          for (const unsigned threads : {1u, 3u}) {
            VoteOptions o;
            o.threads = threads;
            o.strategy = strategy;
            o.min_separation = 1e-6 * s.extent;
            const auto r = accumulate_votes(pos, clusters, g, o);
            std::map<oracle::Voxel, std::uint64_t> got;
            const auto counts = r.grid.counts();
            for (std::uint64_t i = 0; i < counts.size(); ++i) {
              if (!counts[i]) continue;
              const auto v = r.grid.unlinear(i);
              got[{v.alpha, v.beta, v.gamma}] = counts[i];
            }
            CHECK(got == expect.counts);
            CHECK(r.stats.skipped_out_of_range == expect.skipped_range);
          }
        }
      }
    }
  }
}

TEST_CASE("exact mirror is recovered within one voxel") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 100);
    SyntheticSpec spec;
    spec.base_count = 200;
    spec.mirrors = {{random_mirror(rng, 1.0), 1.0}};
    spec.seed = seed;
    const auto syn = gen_synthetic(spec);
    const auto& s = syn.scene;
    const GridConfig g{0.01, 0.01, 0.01, s.extent};
    const auto clusters = build_clusters(s, {}, iota(s.size()));
    const auto r = accumulate_votes(s.positions(), clusters, g, {});
    const auto peak = argmax_mirror(r.grid, g);
    REQUIRE(peak);
    const VoxelIndex truth = params_to_voxel(syn.mirrors[0], g);
    CHECK(peak->voxel == truth);
    CHECK(peak->votes == 200);
  }
}

TEST_CASE("partition sets are disjoint, exhaustive and sided") {
  std::mt19937_64 rng(77);
  SyntheticSpec spec;
  spec.base_count = 300;
  spec.mirrors = {{random_mirror(rng, 1.0), 0.6}};
  spec.seed = 77;
  const auto syn = gen_synthetic(spec);
  const auto& s = syn.scene;
  const auto pos = s.positions();
  const GridConfig g{0.01, 0.01, 0.01, s.extent};
  const auto clusters = build_clusters(s, {}, iota(s.size()));
  PartitionOptions po;
  const auto p = partition_by_mirror(pos, clusters, iota(s.size()), syn.mirrors[0], g, po);
  REQUIRE(p);
  CHECK(p->left.size() == 180);
  CHECK(p->left.size() == p->right.size());
  std::vector<int> seen(s.size(), 0);
  for (auto i : p->left) {
    ++seen[i];
    CHECK(p->mirror.signed_distance(pos[i]) > 0);
  }
  for (auto i : p->right) {
    ++seen[i];
    CHECK(p->mirror.signed_distance(pos[i]) < 0);
  }
  for (auto i : p->out) ++seen[i];
  for (int c : seen) CHECK(c == 1);
  for (std::size_t k = 0; k < p->left.size(); ++k) {
    CHECK((reflect_point(pos[p->left[k]], p->mirror) - pos[p->right[k]]).norm() < 1e-9);
  }
}

TEST_CASE("unmatched participants are demoted to out") {
  const MirrorPlane m = MirrorPlane::from_normal_offset({1, 0, 0}, 0.0);
  const std::vector<Vec3> pos{{1, 0, 0}, {-1, 0, 0}, {2, 0, 0}, {-2.5, 0, 0}, {0.5, 1, 0}};
  const std::vector<std::uint32_t> all{0, 1, 2, 3, 4};
  const auto p = match_bijection(pos, all, std::vector<std::uint32_t>{0, 1, 2, 3}, m, 0.01);
  CHECK(p.left == std::vector<std::uint32_t>{0});
  CHECK(p.right == std::vector<std::uint32_t>{1});
  CHECK(p.out == std::vector<std::uint32_t>{2, 3, 4});
}
