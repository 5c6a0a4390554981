#pragma once

#include <optional>

#include "symgs/scene.hpp"

namespace symgs {

/// A reflective-symmetry plane n . x = gamma in canonical form.
///
/// The unit normal is the spherical chart with x as the polar axis:
///   n = (cos a, sin a sin(b - pi), sin a cos(b - pi)),
/// so alpha = acos(n_x) in [0, pi] and beta = pi + atan2(n_y, n_z) in
/// [0, 2pi). gamma >= 0; the normal is flipped to make it so.
struct MirrorPlane {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  [[nodiscard]] Vec3 normal() const;
  /// n . x - gamma; positive on the normal side.
  [[nodiscard]] double signed_distance(const Vec3& x) const;

  /// Canonical parameters of the plane n . x = offset. `n` need not be unit.
  static MirrorPlane from_normal_offset(const Vec3& n, double offset);

  friend bool operator==(const MirrorPlane&, const MirrorPlane&) = default;
};

struct PairPlane {
  Vec3 center;
  Vec3 normal;
};

/// Bisecting plane of two positions: midpoint and unit direction xj -> xi.
/// nullopt when the points are closer than `min_separation`.
std::optional<PairPlane> plane_from_pair(const Vec3& xi, const Vec3& xj, double min_separation);

/// Canonical (alpha, beta, gamma) of the plane through `center` with unit normal `normal`.
MirrorPlane plane_to_params(const Vec3& center, const Vec3& normal);

/// Re-derives canonical parameters; use after unconstrained updates to (alpha, beta, gamma).
MirrorPlane canonicalize(const MirrorPlane& m);

/// Householder reflection of a point: x - 2 (n . x - gamma) n.
Vec3 reflect_point(const Vec3& x, const MirrorPlane& m);

/// The same plane expressed in a frame whose origin moved by `shift`
/// (new coordinates x' = x - shift).
MirrorPlane shift_origin(const MirrorPlane& m, const Vec3& shift);

/// Angle between two planes' normals, treating antipodal normals as equal.
double angular_error(const MirrorPlane& a, const MirrorPlane& b);

/// Distance between the planes' offsets once their normals are aligned.
double offset_error(const MirrorPlane& a, const MirrorPlane& b);

}  // namespace symgs
