#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "geoeval/geometry.hpp"

namespace geoeval {

/// Exact nearest-neighbour index over a fixed 3D point set.
///
/// Median-split tree with bucketed leaves; queries prune a subtree only when
/// the splitting plane is farther than the current best, so results equal a
/// linear scan bit for bit.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  explicit KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      build(0, points_.size());
    }
  }

  [[nodiscard]] std::size_t size() const { return points_.size(); }

  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  [[nodiscard]] Neighbor nearest(const Vec3& q) const {
    Neighbor best;
    if (!nodes_.empty()) search(0, q, best);
    return best;
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (std::size_t k = begin; k < end; ++k) {
      lo = lo.cwiseMin(points_[order_[k]]);
      hi = hi.cwiseMax(points_[order_[k]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (!(hi[axis] > lo[axis])) return id;  // all coincident

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const double split = points_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    Node& n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  void search(std::size_t id, const Vec3& q, Neighbor& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t k = n.begin; k < n.end; ++k) {
        const std::uint32_t idx = order_[k];
        const double d = (points_[idx] - q).squaredNorm();
        if (d < best.squared_distance ||
            (d == best.squared_distance && idx < best.index)) {
          best.squared_distance = d;
          best.index = idx;
        }
      }
      return;
    }
    // Left holds coordinates <= split, right holds >= split.
    const double diff = q[n.axis] - n.split;
    const std::size_t near = diff < 0.0 ? n.left : n.right;
    const std::size_t far = diff < 0.0 ? n.right : n.left;
    search(near, q, best);
    if (diff * diff <= best.squared_distance) search(far, q, best);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace geoeval
