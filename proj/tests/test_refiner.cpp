#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symgs/errors.hpp"
#include "symgs/refiner.hpp"
#include "symgs/synthetic.hpp"

using namespace symgs;

namespace {

struct Cloud {
  std::vector<Vec3> left, right;
  MirrorPlane truth;
};

Cloud symmetric_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Cloud c;
  c.truth = random_mirror(rng, 1.0);
  std::uniform_real_distribution<double> u(-1, 1);
  while (c.left.size() < n) {
    const Vec3 x(u(rng), u(rng), u(rng));
    if (x.norm() > 1 || c.truth.signed_distance(x) < 0.02) continue;
    c.left.push_back(x);
    c.right.push_back(reflect_point(x, c.truth));
  }
  return c;
}

}  // namespace

TEST_CASE("cost is zero at the true plane") {
  const Cloud c = symmetric_cloud(200, 1);
  CHECK(symmetry_cost(c.left, c.right, c.truth) < 1e-24);
}

TEST_CASE("offset plane costs (2 delta)^2 on isolated points") {
  const std::vector<Vec3> l{{1, 0, 0}}, r{{-1, 0, 0}};
  const MirrorPlane m = MirrorPlane::from_normal_offset({1, 0, 0}, 0.1);
  CHECK(symmetry_cost(l, r, m) == doctest::Approx(0.04));

  const Cloud c = symmetric_cloud(50, 2);
  const double delta = 1e-3;
  const MirrorPlane shifted{c.truth.alpha, c.truth.beta, c.truth.gamma + delta};
  CHECK(symmetry_cost(c.left, c.right, shifted) == doctest::Approx(4 * delta * delta).epsilon(1e-6));
  CHECK(symmetry_cost(c.left, c.right, shifted) ==
        doctest::Approx(oracle::chamfer(c.left, c.right, shifted.normal(), shifted.gamma)));
}

TEST_CASE("trimmed cost ignores the worst tenth") {
  Cloud c = symmetric_cloud(100, 3);
  for (int i = 0; i < 10; ++i) c.left[i] += Vec3(0.3, 0.3, 0.3);
  CHECK(symmetry_cost(c.left, c.right, c.truth, RefineObjective::one_sided_chamfer) > 1e-3);
  const double trimmed = symmetry_cost(c.left, c.right, c.truth, RefineObjective::trimmed_chamfer, 0.9);
  CHECK(trimmed == doctest::Approx(oracle::chamfer(c.left, c.right, c.truth.normal(), c.truth.gamma, 0.9)));
  CHECK(trimmed < 1e-20);
}

TEST_CASE("refinement recovers an offset perturbed by half a voxel") {
  const Cloud c = symmetric_cloud(500, 4);
  const MirrorPlane m0{c.truth.alpha, c.truth.beta, c.truth.gamma + 0.005};
  const RefineResult r = refine_mirror(c.left, c.right, m0);
  CHECK(offset_error(r.mirror, c.truth) < 1e-4);
  CHECK(r.final_cost <= r.initial_cost);
}

TEST_CASE("refinement recovers a tilted normal") {
  const Cloud c = symmetric_cloud(1000, 5);
  const MirrorPlane m0{c.truth.alpha + 0.005, c.truth.beta, c.truth.gamma};
  const RefineResult r = refine_mirror(c.left, c.right, m0);
  CHECK(angular_error(r.mirror, c.truth) < 1e-3);
}

TEST_CASE("an optimal plane stays put") {
  const Cloud c = symmetric_cloud(300, 6);
  const RefineResult r = refine_mirror(c.left, c.right, c.truth);
  CHECK(angular_error(r.mirror, c.truth) < 1e-9);
  CHECK(offset_error(r.mirror, c.truth) < 1e-9);
}

TEST_CASE("accepted costs never increase") {
  Cloud c = symmetric_cloud(400, 7);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 0.01);
  for (auto& x : c.right) x += Vec3(n(rng), n(rng), n(rng));
  const MirrorPlane m0{c.truth.alpha - 0.004, c.truth.beta + 0.003, c.truth.gamma + 0.004};
  for (const auto obj : {RefineObjective::one_sided_chamfer, RefineObjective::trimmed_chamfer}) {
    RefineOptions o;
    o.objective = obj;
    const RefineResult r = refine_mirror(c.left, c.right, m0, o);
    REQUIRE(!r.accepted_costs.empty());
    CHECK(r.accepted_costs.front() == r.initial_cost);
    for (std::size_t i = 1; i < r.accepted_costs.size(); ++i) CHECK(r.accepted_costs[i] <= r.accepted_costs[i - 1]);
    CHECK(r.final_cost <= r.initial_cost);
    CHECK(r.final_cost == doctest::Approx(symmetry_cost(c.left, c.right, r.mirror, obj)).epsilon(1e-9));
  }
}

TEST_CASE("non-finite input aborts with a warning") {
  Cloud c = symmetric_cloud(20, 8);
  c.left[0] = Vec3(NAN, 0, 0);
  const MirrorPlane m0{c.truth.alpha + 0.01, c.truth.beta, c.truth.gamma};
  RefineOptions o;
  o.objective = RefineObjective::one_sided_chamfer;
  const RefineResult r = refine_mirror(c.left, c.right, m0, o);
  CHECK(r.warning);
  CHECK(r.mirror == m0);
}

TEST_CASE("central and forward differences agree on frozen correspondences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Cloud c = symmetric_cloud(200, 100 + seed);
    const double scale = 1.0;
    const KdTree tree(c.right);
    const MirrorPlane at{c.truth.alpha + 0.003, c.truth.beta - 0.002, c.truth.gamma + 0.004};
    const FrozenCost f(c.left, c.right, tree, at, scale, RefineObjective::trimmed_chamfer, 0.9);
    const Vec3 p = plane_params(at, scale);
    const Vec3 central = f.gradient_central(p, 1e-6);
    const Vec3 forward = f.gradient_forward(p, 1e-8);
    CHECK((central - forward).norm() <= 1e-4 * central.norm());
  }
}

TEST_CASE("invalid options are rejected") {
  const Cloud c = symmetric_cloud(10, 9);
  RefineOptions o;
  o.max_iters = 0;
  CHECK_THROWS_AS(refine_mirror(c.left, c.right, c.truth, o), ConfigError);
  o = {};
  o.step_size = 0;
  CHECK_THROWS_AS(refine_mirror(c.left, c.right, c.truth, o), ConfigError);
}
