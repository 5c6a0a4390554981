#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace symgs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

double logistic(double x);
double logit(double p);

/// One splat primitive.
///
/// Appearance is held in the storage domain used by 3DGS exports: log-space
/// scales, opacity logit, SH DC coefficients and the optional higher-order SH
/// payload, all as float. Reflection and serialization copy these fields
/// verbatim, so they survive any number of round trips bit-exactly. The
/// activated values are available through scale() and opacity().
///
/// Position and rotation are double; they are the fields transformed by
/// reflection.
struct Gaussian {
  Vec3 position = Vec3::Zero();
  std::array<float, 3> log_scale{0.f, 0.f, 0.f};
  Quat rotation = Quat::Identity();  // (w, x, y, z)
  float opacity_logit = 0.f;
  std::array<float, 3> color_dc{0.f, 0.f, 0.f};
  std::vector<float> sh_rest;  // opaque f_rest_* payload

  [[nodiscard]] Vec3 scale() const;
  [[nodiscard]] double opacity() const;
  /// R diag(s^2) R^T
  [[nodiscard]] Mat3 covariance() const;
};

/// Field-by-field bitwise equality (distinguishes -0.0 from 0.0).
bool bit_equal(const Gaussian& a, const Gaussian& b);

/// Normalizes a quaternion in single precision, so every component is
/// exactly representable as float. Used wherever rotations enter the
/// pipeline (PLY load, synthetic generation) so the float codec is lossless
/// for them.
Quat normalized_f32(const Quat& q);

struct GaussianScene {
  std::vector<Gaussian> gaussians;
  Vec3 centroid_offset = Vec3::Zero();
  double extent = 0.0;

  [[nodiscard]] std::size_t size() const { return gaussians.size(); }
  [[nodiscard]] bool empty() const { return gaussians.empty(); }
  [[nodiscard]] std::vector<Vec3> positions() const;
};

/// Recenters positions at their centroid (adding the shift to any existing
/// offset) and recomputes the extent.
GaussianScene make_scene(std::vector<Gaussian> gaussians, const Vec3& prior_offset = Vec3::Zero());

/// Wraps gaussians that are already expressed in a recentered frame.
GaussianScene make_scene_in_frame(std::vector<Gaussian> gaussians, const Vec3& centroid_offset);

GaussianScene load_ply(const std::filesystem::path& path);
GaussianScene read_ply(std::istream& in);

void save_ply(const GaussianScene& scene, const std::filesystem::path& path);
void write_ply(const GaussianScene& scene, std::ostream& out);

/// Exact byte size save_ply would produce.
std::uint64_t ply_byte_size(const GaussianScene& scene);

}  // namespace symgs
