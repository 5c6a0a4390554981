#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "symgs/kdtree.hpp"
#include "symgs/mirror.hpp"

namespace symgs {

enum class RefineObjective { one_sided_chamfer, trimmed_chamfer };

struct RefineOptions {
  double step_size = 1e-3;  // initial trust radius in (alpha, beta, gamma / scale)
  int max_iters = 200;
  double tol = 1e-8;        // stop when an accepted step lowers the cost by less than this fraction
  RefineObjective objective = RefineObjective::trimmed_chamfer;
  double trim_fraction = 0.9;
  double scale = 0.0;       // gamma normalisation; 0: largest point norm
  double fd_step = 1e-6;

  void validate() const;
};

/// Mean squared distance from each reflected left point to its nearest right
/// point. The trimmed objective averages the smallest ceil(trim * n) terms.
double symmetry_cost(std::span<const Vec3> left, std::span<const Vec3> right, const MirrorPlane& m,
                     RefineObjective objective = RefineObjective::one_sided_chamfer, double trim_fraction = 0.9);

/// Unconstrained parameter vector (alpha, beta, gamma / scale) and back.
Vec3 plane_params(const MirrorPlane& m, double scale);
MirrorPlane params_plane(const Vec3& p, double scale);

/// The symmetry cost with nearest-neighbour correspondences frozen at the
/// plane it was built for. Smooth in the parameters.
class FrozenCost {
 public:
  FrozenCost(std::span<const Vec3> left, std::span<const Vec3> right, const KdTree& right_tree,
             const MirrorPlane& at, double scale, RefineObjective objective, double trim_fraction);

  [[nodiscard]] double operator()(const Vec3& p) const;
  [[nodiscard]] Vec3 gradient_central(const Vec3& p, double h) const;
  [[nodiscard]] Vec3 gradient_forward(const Vec3& p, double h) const;
  /// Gauss-Newton approximation 2 J^T J / m of the Hessian.
  [[nodiscard]] Mat3 gauss_newton(const Vec3& p, double h) const;

  [[nodiscard]] std::size_t matches() const { return pairs_.size(); }

 private:
  void residuals(const Vec3& p, std::vector<double>& out) const;

  std::span<const Vec3> left_;
  std::span<const Vec3> right_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
  double scale_;
};

struct RefineResult {
  MirrorPlane mirror;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool warning = false;              // non-finite cost; mirror is m0
  std::vector<double> accepted_costs;  // initial cost first
};

/// Trust-region descent on (alpha, beta, gamma) with finite-difference
/// gradients and correspondences re-matched every iteration. Only steps that
/// lower the re-matched cost are accepted, so final_cost <= initial_cost.
RefineResult refine_mirror(std::span<const Vec3> left, std::span<const Vec3> right, const MirrorPlane& m0,
                           const RefineOptions& opts = {});

}  // namespace symgs
