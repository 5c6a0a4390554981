#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "symgs/mirror.hpp"
#include "symgs/scene.hpp"

namespace symgs {

enum class AttributeProfile {
  uniform,  // independent random appearance per Gaussian
  k_color,  // k palette colours with fixed opacity and scale
};

struct MirrorSpec {
  MirrorPlane plane;
  double coverage = 1.0;  // fraction of base_count sampled fresh at this level
};

/// mirrors[0] is the outermost plane. Level l's fresh points, together with
/// everything generated for levels > l, lie on the positive side of mirror l
/// and are reflected across it.
struct SyntheticSpec {
  std::size_t base_count = 1000;
  std::vector<MirrorSpec> mirrors;
  double noise_sigma = 0.0;  // jitter on reflected positions
  AttributeProfile profile = AttributeProfile::k_color;
  std::uint32_t k_colors = 8;
  std::uint64_t seed = 0;
  double radius = 1.0;   // sampling ball
  double margin = 0.02;  // minimum distance of sampled points from a plane, times radius

  void validate() const;
};

struct SyntheticScene {
  GaussianScene scene;
  std::vector<MirrorPlane> mirrors;      // in the recentered frame
  std::vector<std::size_t> level_pairs;  // mirrored pairs per level
  std::size_t asymmetric = 0;
};

SyntheticScene gen_synthetic(const SyntheticSpec& spec);

/// A plane with |n_x| < 0.95 and offset in [0.05, 0.4] * radius.
MirrorPlane random_mirror(std::mt19937_64& rng, double radius);

/// `count` (<= 3) mutually orthogonal planes with offsets in [0.02, 0.15] * radius.
std::vector<MirrorPlane> orthogonal_mirrors(std::mt19937_64& rng, std::size_t count, double radius);

Quat random_rotation(std::mt19937_64& rng);

}  // namespace symgs
