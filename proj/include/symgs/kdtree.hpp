#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "symgs/scene.hpp"

namespace symgs {

struct Neighbor {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
  double dist2 = std::numeric_limits<double>::infinity();
};

/// Static 3D kd-tree over a point set. Indices returned are positions in the
/// span given at construction. Read-only after construction, so concurrent
/// queries are safe.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] bool empty() const { return points_.empty(); }

  /// Nearest point; index is max() when the tree is empty.
  [[nodiscard]] Neighbor nearest(const Vec3& q) const;

  /// All points with squared distance <= radius^2, sorted by distance then index.
  [[nodiscard]] std::vector<Neighbor> within(const Vec3& q, double radius) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // leaf range into order_
    std::int32_t left = -1, right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Vec3& q, Neighbor& best) const;
  void search_radius(std::int32_t node, const Vec3& q, double r2, std::vector<Neighbor>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace symgs
