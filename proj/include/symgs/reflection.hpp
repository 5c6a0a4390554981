#pragma once

#include <span>
#include <vector>

#include "symgs/mirror.hpp"
#include "symgs/scene.hpp"

namespace symgs {

enum class RotationMode {
  householder,  // R' = H R with the first column negated
  copy,         // quaternion copied verbatim
};

/// Mirrors a Gaussian: position through reflect_point, rotation per `mode`,
/// appearance fields copied verbatim.
Gaussian reflect_gaussian(const Gaussian& g, const MirrorPlane& m, RotationMode mode = RotationMode::householder);

/// I - 2 n n^T
Mat3 householder(const Vec3& n);

std::vector<Gaussian> reflect_all(std::span<const Gaussian> gs, const MirrorPlane& m,
                                  RotationMode mode = RotationMode::householder);

}  // namespace symgs
