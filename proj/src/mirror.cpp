#include "symgs/mirror.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace symgs {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

Vec3 MirrorPlane::normal() const {
  const double sa = std::sin(alpha);
  const double phi = beta - kPi;
  return {std::cos(alpha), sa * std::sin(phi), sa * std::cos(phi)};
}

double MirrorPlane::signed_distance(const Vec3& x) const { return normal().dot(x) - gamma; }

MirrorPlane MirrorPlane::from_normal_offset(const Vec3& n, double offset) {
  const double len = n.norm();
  const Vec3 unit = n / len;
  return plane_to_params((offset / len) * unit, unit);
}

std::optional<PairPlane> plane_from_pair(const Vec3& xi, const Vec3& xj, double min_separation) {
  const Vec3 d = xi - xj;
  const double len = d.norm();
  if (!(len > min_separation)) return std::nullopt;
  return PairPlane{0.5 * (xi + xj), d / len};
}

MirrorPlane plane_to_params(const Vec3& center, const Vec3& normal) {
  Vec3 n = normal;
  double gamma = n.dot(center);
  if (gamma < 0.0) {
    n = -n;
    gamma = -gamma;
  }
  // Adding 0.0 turns -0.0 into +0.0 so atan2 does not jump by 2pi on signed zeros.
  const double nx = std::clamp(n.x(), -1.0, 1.0) + 0.0;
  const double ny = n.y() + 0.0;
  const double nz = n.z() + 0.0;
  double beta = kPi + std::atan2(ny, nz);
  if (beta >= kTwoPi) beta -= kTwoPi;
  if (beta < 0.0) beta += kTwoPi;
  return {std::acos(nx), beta, gamma};
}

MirrorPlane canonicalize(const MirrorPlane& m) { return plane_to_params(m.gamma * m.normal(), m.normal()); }

Vec3 reflect_point(const Vec3& x, const MirrorPlane& m) {
  const Vec3 n = m.normal();
  return x - 2.0 * (n.dot(x) - m.gamma) * n;
}

MirrorPlane shift_origin(const MirrorPlane& m, const Vec3& shift) {
  const Vec3 n = m.normal();
  return plane_to_params((m.gamma - n.dot(shift)) * n, n);
}

double angular_error(const MirrorPlane& a, const MirrorPlane& b) {
  const double c = std::abs(a.normal().dot(b.normal()));
  // acos is ill-conditioned near 1; use the cross product for small angles.
  const double s = a.normal().cross(b.normal()).norm();
  return std::atan2(s, c);
}

double offset_error(const MirrorPlane& a, const MirrorPlane& b) {
  const double d = a.normal().dot(b.normal());
  return d >= 0.0 ? std::abs(a.gamma - b.gamma) : std::abs(a.gamma + b.gamma);
}

}  // namespace symgs
