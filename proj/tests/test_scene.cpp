#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "symgs/color.hpp"
#include "symgs/errors.hpp"
#include "symgs/scene.hpp"

using namespace symgs;

namespace {

std::string ascii_ply(const std::string& props, const std::vector<std::string>& rows) {
  std::ostringstream s;
  s << "ply\nformat ascii 1.0\nelement vertex " << rows.size() << "\n" << props << "end_header\n";
  for (const auto& r : rows) s << r << "\n";
  return s.str();
}

const std::string kProps =
    "property float x\nproperty float y\nproperty float z\n"
    "property float f_dc_0\nproperty float f_dc_1\nproperty float f_dc_2\n"
    "property float opacity\n"
    "property float scale_0\nproperty float scale_1\nproperty float scale_2\n"
    "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n";

GaussianScene parse(const std::string& text) {
  std::istringstream in(text);
  return read_ply(in);
}

GaussianScene random_scene(std::size_t n, std::uint64_t seed, std::size_t sh = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<float> f(-2, 2);
  std::vector<Gaussian> gs;
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian g;
    g.position = Vec3(u(rng), u(rng), u(rng));
    g.log_scale = {f(rng) - 3, f(rng) - 3, f(rng) - 3};
    g.rotation = normalized_f32(Quat(u(rng), u(rng), u(rng), u(rng)));
    g.opacity_logit = f(rng);
    g.color_dc = {f(rng), f(rng), f(rng)};
    for (std::size_t k = 0; k < sh; ++k) g.sh_rest.push_back(f(rng));
    gs.push_back(g);
  }
  return make_scene(std::move(gs));
}

}  // namespace

TEST_CASE("zero log-scale and zero logit activate to unit scale and half opacity") {
  const auto s = parse(ascii_ply(kProps, {"0 0 0 0 0 0 0 0 0 0 1 0 0 0"}));
  REQUIRE(s.size() == 1);
  CHECK(s.gaussians[0].scale().isApprox(Vec3(1, 1, 1)));
  CHECK(s.gaussians[0].opacity() == doctest::Approx(0.5));
}

TEST_CASE("loading recenters at the centroid") {
  const auto s = parse(ascii_ply(kProps, {"1 0 0 0 0 0 0 0 0 0 1 0 0 0", "3 0 0 0 0 0 0 0 0 0 1 0 0 0"}));
  CHECK(s.centroid_offset.isApprox(Vec3(2, 0, 0)));
  CHECK(s.gaussians[0].position.isApprox(Vec3(-1, 0, 0)));
  CHECK(s.gaussians[1].position.isApprox(Vec3(1, 0, 0)));
  CHECK(s.extent == doctest::Approx(1.0));
}

TEST_CASE("quaternions are normalized on load") {
  const auto s = parse(ascii_ply(kProps, {"0 0 0 0 0 0 0 0 0 0 2 0 0 0"}));
  CHECK(s.gaussians[0].rotation.norm() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("missing property is reported by name") {
  std::string props = kProps;
  props.erase(props.find("property float opacity\n"), std::string("property float opacity\n").size());
  try {
    parse(ascii_ply(props, {"0 0 0 0 0 0 0 0 0 1 0 0 0"}));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("opacity") != std::string::npos);
  }
}

TEST_CASE("non-finite value is reported with the vertex index") {
  try {
    parse(ascii_ply(kProps, {"0 0 0 0 0 0 0 0 0 0 1 0 0 0", "0 nan 0 0 0 0 0 0 0 0 1 0 0 0"}));
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("binary round trip preserves every field") {
  const auto s = random_scene(100, 7, 9);
  std::stringstream buf;
  write_ply(s, buf);
  CHECK(buf.str().size() == ply_byte_size(s));
  const auto r = read_ply(buf);
  REQUIRE(r.size() == s.size());
  CHECK((r.centroid_offset - s.centroid_offset).norm() < 1e-6);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& a = s.gaussians[i];
    const auto& b = r.gaussians[i];
    CHECK((a.position - b.position).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.scale() - b.scale()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(a.opacity() - b.opacity()) < 1e-6);
    CHECK(a.log_scale == b.log_scale);
    CHECK(a.color_dc == b.color_dc);
    CHECK(a.opacity_logit == b.opacity_logit);
    CHECK(a.sh_rest == b.sh_rest);
    CHECK((a.rotation.coeffs() - b.rotation.coeffs()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("reloading a centered scene gives a near-zero offset") {
  auto s = random_scene(50, 3);
  s.centroid_offset = Vec3::Zero();
  std::stringstream buf;
  write_ply(s, buf);
  const auto r = read_ply(buf);
  CHECK(r.centroid_offset.norm() < 1e-6 * s.extent);
}

TEST_CASE("saving re-adds the centroid offset") {
  Gaussian g;
  g.position = Vec3(-1, 0, 0);
  const auto s = make_scene_in_frame({g}, Vec3(2, 0, 0));
  std::stringstream buf;
  write_ply(s, buf);
  const std::string text = buf.str();
  const auto body = text.substr(text.find("end_header\n") + 11);
  float x;
  std::memcpy(&x, body.data(), 4);
  CHECK(x == 1.0f);
}

TEST_CASE("saving an empty scene throws") {
  std::stringstream buf;
  CHECK_THROWS_AS(write_ply(GaussianScene{}, buf), std::invalid_argument);
}

TEST_CASE("unwritable path raises an I/O error") {
  CHECK_THROWS_AS(save_ply(random_scene(2, 1), "/nonexistent-dir/x.ply"), IoError);
}

TEST_CASE("dc_to_rgb") {
  CHECK(dc_to_rgb(std::array<double, 3>{0, 0, 0}) == Rgb{0.5, 0.5, 0.5});
  const auto c = dc_to_rgb(std::array<double, 3>{1.7726, 0, 0});
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 0.5);
  CHECK(dc_to_rgb(std::array<double, 3>{-10, -10, -10}) == Rgb{0, 0, 0});
}

TEST_CASE("rgb_to_hsv") {
  CHECK(rgb_to_hsv({1, 0, 0}) == Hsv{0, 1, 1});
  CHECK(rgb_to_hsv({0.5, 0.5, 0.5}) == Hsv{0, 0, 0.5});
  const auto g = rgb_to_hsv({0, 1, 0});
  CHECK(g[0] == doctest::Approx(1.0 / 3.0));
  CHECK(g[1] == 1.0);
  CHECK(g[2] == 1.0);
}

TEST_CASE("rgb_to_dc inverts dc_to_rgb") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Rgb c{u(rng), u(rng), u(rng)};
    const Rgb back = dc_to_rgb(rgb_to_dc(c));
    for (int k = 0; k < 3; ++k) CHECK(back[k] == doctest::Approx(c[k]).epsilon(1e-12));
  }
}

TEST_CASE("recentered scene has zero centroid") {
  const auto s = random_scene(200, 11);
  Vec3 c = Vec3::Zero();
  for (const auto& g : s.gaussians) c += g.position;
  CHECK((c / 200).norm() < 1e-6 * s.extent);
  double r = 0;
  for (const auto& g : s.gaussians) r = std::max(r, g.position.norm());
  CHECK(s.extent == r);
}
