#include "symgs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "symgs/reflection.hpp"

namespace symgs {

namespace {

Vec3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (p.squaredNorm() <= 1.0) return radius * p;
  }
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-9) return v / len;
  }
}

struct Palette {
  std::vector<std::array<float, 3>> colors;
  std::array<float, 3> log_scale{};
  float opacity_logit = 0.f;
};

Palette make_palette(std::mt19937_64& rng, std::uint32_t k) {
  std::uniform_real_distribution<float> dc(-1.5f, 1.5f);
  Palette p;
  for (std::uint32_t i = 0; i < k; ++i) p.colors.push_back({dc(rng), dc(rng), dc(rng)});
  p.log_scale = {-4.5f, -4.5f, -4.5f};
  p.opacity_logit = 2.0f;
  return p;
}

Gaussian make_gaussian(std::mt19937_64& rng, const Vec3& pos, AttributeProfile profile, const Palette& palette) {
  Gaussian g;
  g.position = pos;
  g.rotation = normalized_f32(random_rotation(rng));
  if (profile == AttributeProfile::k_color) {
    std::uniform_int_distribution<std::size_t> pick(0, palette.colors.size() - 1);
    g.color_dc = palette.colors[pick(rng)];
    g.log_scale = palette.log_scale;
    g.opacity_logit = palette.opacity_logit;
  } else {
    std::uniform_real_distribution<float> dc(-1.7f, 1.7f);
    std::uniform_real_distribution<float> ls(-8.0f, -1.5f);
    std::uniform_real_distribution<float> op(-4.0f, 4.0f);
    g.color_dc = {dc(rng), dc(rng), dc(rng)};
    g.log_scale = {ls(rng), ls(rng), ls(rng)};
    g.opacity_logit = op(rng);
  }
  return g;
}

/// Checks that the orbit of x under mirrors[level], then mirrors[level-1], ...,
/// stays on the positive side of each next plane with the given margin.
bool orbit_ok(const Vec3& x, const std::vector<MirrorSpec>& mirrors, std::size_t level, double margin) {
  std::vector<Vec3> orbit{x};
  for (std::size_t j = level + 1; j-- > 0;) {
    const MirrorPlane& m = mirrors[j].plane;
    for (const auto& p : orbit) {
      if (m.signed_distance(p) <= margin) return false;
    }
    const std::size_t n = orbit.size();
    for (std::size_t i = 0; i < n; ++i) orbit.push_back(reflect_point(orbit[i], m));
  }
  return true;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (profile == AttributeProfile::k_color && k_colors == 0) throw std::invalid_argument("k_colors must be positive");
  double total = 0.0;
  for (const auto& m : mirrors) {
    if (!(m.coverage > 0.0) || m.coverage > 1.0) throw std::invalid_argument("coverage must be in (0, 1]");
    total += m.coverage;
  }
  if (total > 1.0 + 1e-9) throw std::invalid_argument("coverages must sum to at most 1");
}

Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Quat q(n(rng), n(rng), n(rng), n(rng));
    if (q.norm() > 1e-6) return q.normalized();
  }
}

MirrorPlane random_mirror(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> off(0.05, 0.4);
  for (;;) {
    const Vec3 n = random_unit(rng);
    if (std::abs(n.x()) < 0.95) return MirrorPlane::from_normal_offset(n, off(rng) * radius);
  }
}

std::vector<MirrorPlane> orthogonal_mirrors(std::mt19937_64& rng, std::size_t count, double radius) {
  if (count > 3) throw std::invalid_argument("at most three orthogonal mirrors");
  std::uniform_real_distribution<double> off(0.02, 0.15);
  for (;;) {
    const Mat3 frame = random_rotation(rng).toRotationMatrix();
    bool ok = true;
    for (std::size_t i = 0; i < count; ++i) ok = ok && std::abs(frame(0, static_cast<Eigen::Index>(i))) < 0.95;
    if (!ok) continue;
    std::vector<MirrorPlane> out;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(MirrorPlane::from_normal_offset(frame.col(static_cast<Eigen::Index>(i)), off(rng) * radius));
    }
    return out;
  }
}

SyntheticScene gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const Palette palette = make_palette(rng, std::max<std::uint32_t>(1, spec.k_colors));
  const double margin = spec.margin * spec.radius;
  std::normal_distribution<double> jitter(0.0, spec.noise_sigma);

  SyntheticScene out;
  out.level_pairs.assign(spec.mirrors.size(), 0);

  // Built innermost first: structure holds everything generated for levels > l.
  std::vector<Gaussian> structure;
  double covered = 0.0;
  for (std::size_t l = spec.mirrors.size(); l-- > 0;) {
    const MirrorPlane& m = spec.mirrors[l].plane;
    covered += spec.mirrors[l].coverage;
    const auto fresh = static_cast<std::size_t>(std::llround(spec.mirrors[l].coverage * static_cast<double>(spec.base_count)));
    for (std::size_t i = 0; i < fresh; ++i) {
      Vec3 x;
      do {
        x = random_in_ball(rng, spec.radius);
      } while (!orbit_ok(x, spec.mirrors, l, margin));
      structure.push_back(make_gaussian(rng, x, spec.profile, palette));
    }
    out.level_pairs[l] = structure.size();
    const std::size_t n = structure.size();
    for (std::size_t i = 0; i < n; ++i) {
      Gaussian r = reflect_gaussian(structure[i], m, RotationMode::householder);
      r.rotation = normalized_f32(r.rotation);
      if (spec.noise_sigma > 0.0) r.position += Vec3(jitter(rng), jitter(rng), jitter(rng));
      structure.push_back(std::move(r));
    }
  }

  const double rest = std::max(0.0, 1.0 - covered);
  out.asymmetric = static_cast<std::size_t>(std::llround(rest * static_cast<double>(spec.base_count)));
  for (std::size_t i = 0; i < out.asymmetric; ++i) {
    structure.push_back(make_gaussian(rng, random_in_ball(rng, spec.radius), spec.profile, palette));
  }
  std::shuffle(structure.begin(), structure.end(), rng);

  out.scene = make_scene(std::move(structure));
  for (const auto& m : spec.mirrors) out.mirrors.push_back(shift_origin(m.plane, out.scene.centroid_offset));
  return out;
}

}  // namespace symgs
