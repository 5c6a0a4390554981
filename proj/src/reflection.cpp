#include "symgs/reflection.hpp"

namespace symgs {

Mat3 householder(const Vec3& n) { return Mat3::Identity() - 2.0 * n * n.transpose(); }

Gaussian reflect_gaussian(const Gaussian& g, const MirrorPlane& m, RotationMode mode) {
  Gaussian out = g;
  out.position = reflect_point(g.position, m);
  if (mode == RotationMode::householder) {
    Mat3 r = householder(m.normal()) * g.rotation.normalized().toRotationMatrix();
    r.col(0) = -r.col(0);
    out.rotation = Quat(r).normalized();
  }
  return out;
}

std::vector<Gaussian> reflect_all(std::span<const Gaussian> gs, const MirrorPlane& m, RotationMode mode) {
  std::vector<Gaussian> out;
  out.reserve(gs.size());
  for (const auto& g : gs) out.push_back(reflect_gaussian(g, m, mode));
  return out;
}

}  // namespace symgs
