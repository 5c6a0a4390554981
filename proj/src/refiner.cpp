#include "symgs/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "symgs/errors.hpp"

namespace symgs {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t kept_count(std::size_t n, RefineObjective objective, double trim) {
  if (objective == RefineObjective::one_sided_chamfer || n == 0) return n;
  const auto k = static_cast<std::size_t>(std::ceil(trim * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

Vec3 normal_of(double alpha, double beta) {
  const double sa = std::sin(alpha);
  return {std::cos(alpha), sa * std::sin(beta - kPi), sa * std::cos(beta - kPi)};
}

Vec3 reflect_with(const Vec3& x, const Vec3& n, double gamma) { return x - 2.0 * (n.dot(x) - gamma) * n; }

struct Match {
  std::uint32_t left, right;
  double dist2;
};

std::vector<Match> match_all(std::span<const Vec3> left, const KdTree& tree, const Vec3& n, double gamma) {
  std::vector<Match> out;
  out.reserve(left.size());
  for (std::uint32_t i = 0; i < left.size(); ++i) {
    const Neighbor nb = tree.nearest(reflect_with(left[i], n, gamma));
    out.push_back({i, nb.index, nb.dist2});
  }
  return out;
}

void keep_best(std::vector<Match>& ms, RefineObjective objective, double trim) {
  const std::size_t k = kept_count(ms.size(), objective, trim);
  if (k == ms.size()) return;
  std::nth_element(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(k), ms.end(),
                   [](const Match& a, const Match& b) { return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.left < b.left); });
  ms.resize(k);
}

double mean_dist2(const std::vector<Match>& ms) {
  if (ms.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : ms) s += m.dist2;
  return s / static_cast<double>(ms.size());
}

double default_scale(std::span<const Vec3> left, std::span<const Vec3> right) {
  double s = 0.0;
  for (const auto& x : left) s = std::max(s, x.norm());
  for (const auto& x : right) s = std::max(s, x.norm());
  return s > 0.0 ? s : 1.0;
}

double true_cost(std::span<const Vec3> left, const KdTree& tree, const Vec3& p, double scale,
                 RefineObjective objective, double trim) {
  const Vec3 n = normal_of(p[0], p[1]);
  auto ms = match_all(left, tree, n, p[2] * scale);
  keep_best(ms, objective, trim);
  return mean_dist2(ms);
}

}  // namespace

void RefineOptions::validate() const {
  if (!(step_size > 0.0)) throw ConfigError("refiner step_size must be positive");
  if (max_iters < 1) throw ConfigError("refiner max_iters must be at least 1");
  if (!(tol >= 0.0)) throw ConfigError("refiner tol must be non-negative");
  if (!(trim_fraction > 0.0) || trim_fraction > 1.0) throw ConfigError("refiner trim_fraction must be in (0, 1]");
  if (!(fd_step > 0.0)) throw ConfigError("refiner fd_step must be positive");
}

double symmetry_cost(std::span<const Vec3> left, std::span<const Vec3> right, const MirrorPlane& m,
                     RefineObjective objective, double trim_fraction) {
  if (left.empty() || right.empty()) throw std::invalid_argument("symmetry_cost needs non-empty point sets");
  const KdTree tree(right);
  auto ms = match_all(left, tree, m.normal(), m.gamma);
  keep_best(ms, objective, trim_fraction);
  return mean_dist2(ms);
}

Vec3 plane_params(const MirrorPlane& m, double scale) { return {m.alpha, m.beta, m.gamma / scale}; }

MirrorPlane params_plane(const Vec3& p, double scale) { return canonicalize({p[0], p[1], p[2] * scale}); }

FrozenCost::FrozenCost(std::span<const Vec3> left, std::span<const Vec3> right, const KdTree& right_tree,
                       const MirrorPlane& at, double scale, RefineObjective objective, double trim_fraction)
    : left_(left), right_(right), scale_(scale) {
  auto ms = match_all(left, right_tree, at.normal(), at.gamma);
  keep_best(ms, objective, trim_fraction);
  std::sort(ms.begin(), ms.end(), [](const Match& a, const Match& b) { return a.left < b.left; });
  pairs_.reserve(ms.size());
  for (const auto& m : ms) pairs_.emplace_back(m.left, m.right);
}

void FrozenCost::residuals(const Vec3& p, std::vector<double>& out) const {
  const Vec3 n = normal_of(p[0], p[1]);
  const double gamma = p[2] * scale_;
  out.resize(3 * pairs_.size());
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const Vec3 d = reflect_with(left_[pairs_[k].first], n, gamma) - right_[pairs_[k].second];
    out[3 * k] = d.x();
    out[3 * k + 1] = d.y();
    out[3 * k + 2] = d.z();
  }
}

double FrozenCost::operator()(const Vec3& p) const {
  if (pairs_.empty()) return 0.0;
  const Vec3 n = normal_of(p[0], p[1]);
  const double gamma = p[2] * scale_;
  double s = 0.0;
  for (const auto& [l, r] : pairs_) s += (reflect_with(left_[l], n, gamma) - right_[r]).squaredNorm();
  return s / static_cast<double>(pairs_.size());
}

Vec3 FrozenCost::gradient_central(const Vec3& p, double h) const {
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 a = p, b = p;
    a[k] += h;
    b[k] -= h;
    g[k] = ((*this)(a) - (*this)(b)) / (2.0 * h);
  }
  return g;
}

Vec3 FrozenCost::gradient_forward(const Vec3& p, double h) const {
  const double f0 = (*this)(p);
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 a = p;
    a[k] += h;
    g[k] = ((*this)(a) - f0) / h;
  }
  return g;
}

Mat3 FrozenCost::gauss_newton(const Vec3& p, double h) const {
  if (pairs_.empty()) return Mat3::Zero();
  std::vector<double> plus, minus;
  Eigen::MatrixX3d jac(3 * pairs_.size(), 3);
  for (int k = 0; k < 3; ++k) {
    Vec3 a = p, b = p;
    a[k] += h;
    b[k] -= h;
    residuals(a, plus);
    residuals(b, minus);
    for (std::size_t i = 0; i < plus.size(); ++i) jac(static_cast<Eigen::Index>(i), k) = (plus[i] - minus[i]) / (2.0 * h);
  }
  return (2.0 / static_cast<double>(pairs_.size())) * (jac.transpose() * jac);
}

RefineResult refine_mirror(std::span<const Vec3> left, std::span<const Vec3> right, const MirrorPlane& m0,
                           const RefineOptions& opts) {
  opts.validate();
  if (left.empty() || right.empty()) throw std::invalid_argument("refine_mirror needs non-empty point sets");

  const double scale = opts.scale > 0.0 ? opts.scale : default_scale(left, right);
  const KdTree tree(right);

  RefineResult result;
  result.mirror = m0;
  Vec3 p = plane_params(m0, scale);
  double best = true_cost(left, tree, p, scale, opts.objective, opts.trim_fraction);
  result.initial_cost = result.final_cost = best;
  if (!std::isfinite(best)) {
    result.warning = true;
    return result;
  }
  result.accepted_costs.push_back(best);

  double radius = opts.step_size;
  double lambda = 1e-3;
  const double h = opts.fd_step;

  for (int it = 0; it < opts.max_iters && best > 0.0; ++it) {
    result.iterations = it + 1;
    const FrozenCost frozen(left, right, tree, params_plane(p, scale), scale, opts.objective, opts.trim_fraction);
    const Vec3 g = frozen.gradient_central(p, h);
    if (!g.allFinite()) {
      result.warning = true;
      break;
    }
    if (g.norm() == 0.0) break;
    const Mat3 hess = frozen.gauss_newton(p, h);

    bool accepted = false;
    bool clamped = false;
    double decrease = 0.0;
    while (radius > 1e-15) {
      Mat3 a = hess;
      for (int k = 0; k < 3; ++k) a(k, k) += lambda * hess(k, k) + 1e-12 * (1.0 + hess.trace());
      Vec3 d = -a.ldlt().solve(g);
      if (!d.allFinite() || d.dot(g) >= 0.0) d = -g;
      clamped = d.norm() > radius;
      if (clamped) d *= radius / d.norm();
      const Vec3 cand = p + d;
      const double c = true_cost(left, tree, cand, scale, opts.objective, opts.trim_fraction);
      if (std::isfinite(c) && c < best) {
        decrease = (best - c) / best;
        best = c;
        p = cand;
        radius *= 2.0;
        lambda = std::max(lambda * 0.3, 1e-9);
        accepted = true;
        result.accepted_costs.push_back(best);
        break;
      }
      radius *= 0.25;
      lambda = std::min(lambda * 10.0, 1e9);
    }
    if (!accepted || (!clamped && decrease < opts.tol)) break;
  }

  if (best < result.initial_cost) {
    const MirrorPlane m = params_plane(p, scale);
    const double c = true_cost(left, tree, plane_params(m, scale), scale, opts.objective, opts.trim_fraction);
    if (c <= result.initial_cost) {
      result.mirror = m;
      result.final_cost = c;
    }
  }
  return result;
}

}  // namespace symgs
