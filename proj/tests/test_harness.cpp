#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "symgs/compressor.hpp"
#include "symgs/harness.hpp"
#include "symgs/synthetic.hpp"

using namespace symgs;

TEST_CASE("generator counts and determinism") {
  std::mt19937_64 rng(1);
  SyntheticSpec spec;
  spec.base_count = 100;
  spec.mirrors = {{random_mirror(rng, 1.0), 1.0}};
  spec.seed = 9;
  const auto a = gen_synthetic(spec);
  CHECK(a.scene.size() == 200);
  CHECK(a.level_pairs == std::vector<std::size_t>{100});
  const auto b = gen_synthetic(spec);
  REQUIRE(b.scene.size() == a.scene.size());
  for (std::size_t i = 0; i < a.scene.size(); ++i) CHECK(bit_equal(a.scene.gaussians[i], b.scene.gaussians[i]));

  // Every Gaussian has an exact mirror partner.
  const auto& m = a.mirrors[0];
  std::size_t matched = 0;
  for (const auto& g : a.scene.gaussians) {
    const Vec3 r = reflect_point(g.position, m);
    for (const auto& h : a.scene.gaussians) {
      if ((h.position - r).norm() < 1e-9) {
        ++matched;
        break;
      }
    }
  }
  CHECK(matched == 200);
}

TEST_CASE("nested generator reports pairs per level") {
  std::mt19937_64 rng(2);
  const auto planes = orthogonal_mirrors(rng, 2, 1.0);
  SyntheticSpec spec;
  spec.base_count = 1000;
  spec.mirrors = {{planes[0], 0.6}, {planes[1], 0.3}};
  const auto s = gen_synthetic(spec);
  CHECK(s.level_pairs == std::vector<std::size_t>{1200, 300});
  CHECK(s.asymmetric == 100);
  CHECK(s.scene.size() == 2400 + 100);
}

TEST_CASE("invalid specs are rejected") {
  SyntheticSpec spec;
  spec.mirrors = {{MirrorPlane{}, 0.7}, {MirrorPlane{}, 0.7}};
  CHECK_THROWS(gen_synthetic(spec));
  spec.mirrors = {};
  spec.noise_sigma = -1;
  CHECK_THROWS(gen_synthetic(spec));
}

TEST_CASE("detection on an exact scene is within one voxel before refinement") {
  std::mt19937_64 rng(3);
  SyntheticSpec spec;
  spec.base_count = 300;
  spec.mirrors = {{random_mirror(rng, 1.0), 1.0}};
  spec.seed = 3;
  const auto s = gen_synthetic(spec);
  const auto r = eval_detection(s.scene, s.mirrors, PipelineConfig{});
  REQUIRE(r.detected);
  CHECK(r.raw_offset_error <= 0.01);
  CHECK(r.raw_angular_error <= 0.02);
  CHECK(r.angular_error < 1e-6);
  CHECK(r.offset_error < 1e-6);
  CHECK(r.levels_found == 1);
}

TEST_CASE("antipodal ground truth gives zero angular error") {
  std::mt19937_64 rng(4);
  SyntheticSpec spec;
  spec.base_count = 300;
  const MirrorPlane m = random_mirror(rng, 1.0);
  spec.mirrors = {{m, 1.0}};
  const auto s = gen_synthetic(spec);
  const MirrorPlane flipped{std::numbers::pi - s.mirrors[0].alpha,
                            std::fmod(s.mirrors[0].beta + std::numbers::pi, 2 * std::numbers::pi),
                            -s.mirrors[0].gamma};
  const std::vector<MirrorPlane> gt{flipped};
  const auto r = eval_detection(s.scene, gt, PipelineConfig{});
  REQUIRE(r.detected);
  CHECK(r.angular_error < 1e-6);
}

namespace {

SyntheticScene noisy_scene(std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  SyntheticSpec spec;
  spec.base_count = 1000;
  spec.mirrors = {{random_mirror(rng, 1.0), 1.0}};
  spec.noise_sigma = sigma;
  spec.seed = seed;
  return gen_synthetic(spec);
}

double support(const SyntheticScene& s, bool smoothing) {
  PipelineConfig cfg;
  cfg.detector.smoothing = smoothing;
  cfg.compressor.refine = false;
  std::vector<std::uint32_t> ws(s.scene.size());
  for (std::uint32_t i = 0; i < ws.size(); ++i) ws[i] = i;
  const auto step = compress_step(s.scene, ws, cfg);
  return step ? static_cast<double>(step->peak_votes) / static_cast<double>(ws.size()) : 0.0;
}

}  // namespace

TEST_CASE("noise thresholds for the default support gate") {
  // gamma_res = 0.01. Measured minimum support over 10 seeds:
  // sigma 0.005: 0.053 plain, 0.22 smoothed; sigma 0.01: 0.017 plain, 0.10 smoothed.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(support(noisy_scene(seed, 0.005), false) >= 0.05);
    CHECK(support(noisy_scene(seed, 0.01), true) >= 0.05);
  }
}

TEST_CASE("noise twice the offset resolution still locates the plane") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = noisy_scene(seed, 0.02);
    PipelineConfig cfg;
    cfg.compressor.max_levels = 1;
    const auto r = eval_detection(s.scene, s.mirrors, cfg);
    REQUIRE(r.detected);
    CHECK(r.raw_angular_error < 0.03);
    CHECK(r.raw_offset_error < 0.02);
    CHECK(r.angular_error < 0.03);
    CHECK(r.offset_error < 0.01);
  }
}

TEST_CASE("sweep emits one row per value") {
  std::mt19937_64 rng(5);
  SyntheticSpec spec;
  spec.base_count = 300;
  spec.mirrors = {{random_mirror(rng, 1.0), 1.0}};
  const auto s = gen_synthetic(spec);
  const std::vector<double> one{0.1};
  const auto rows = sweep_gamma_res(s.scene, s.mirrors, one, PipelineConfig{});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].detected);
  CHECK(rows[0].levels == 1);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  CHECK(csv.str().rfind("gamma_res,angular_error_rad,offset_error,votes,levels,compressed_bytes,rcf\n", 0) == 0);
  const std::vector<double> descending{0.1, 0.01};
  CHECK_THROWS(sweep_gamma_res(s.scene, s.mirrors, descending, PipelineConfig{}));
}

TEST_CASE("exact scene succeeds at every resolution") {
  std::mt19937_64 rng(6);
  SyntheticSpec spec;
  spec.base_count = 300;
  spec.mirrors = {{random_mirror(rng, 1.0), 0.8}};
  spec.seed = 6;
  const auto s = gen_synthetic(spec);
  const std::vector<double> values{0.01, 0.1, 1.0};
  for (const auto& row : sweep_gamma_res(s.scene, s.mirrors, values, PipelineConfig{})) {
    CHECK(row.detected);
    CHECK(row.levels >= 1);
  }
}
