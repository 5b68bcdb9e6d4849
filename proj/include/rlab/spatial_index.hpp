#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "rlab/types.hpp"

namespace rlab {

/// Build-once read-many kd-tree over a frozen point list. Range queries return
/// exactly the indices of points with |p - c| < r (open ball), matching a
/// linear scan. The index owns the point storage.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(PointMatrix points, int leaf_size = 16)
      : pts_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
    const Index n = pts_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), Index(0));
    if (n > 0) {
      nodes_.reserve(static_cast<size_t>(2 * n / leaf_size_ + 2));
      build(0, n);
    }
  }

  Index size() const { return pts_.rows(); }
  Index dim() const { return pts_.cols(); }
  const PointMatrix& points() const { return pts_; }
  Vec point(Index i) const { return pts_.row(i).transpose(); }

  /// Calls f(i) for every point index i with |p_i - center| < radius.
  template <class F>
  void for_each_in_ball(const Ball& b, F&& f) const {
    if (pts_.rows() == 0) return;
    const Scalar r2 = b.radius * b.radius;
    walk(0, b.center, b.radius, r2, f);
  }

  std::vector<Index> range_query(const Ball& b) const {
    std::vector<Index> out;
    range_query(b, out);
    return out;
  }

  void range_query(const Ball& b, std::vector<Index>& out) const {
    out.clear();
    for_each_in_ball(b, [&](Index i) { out.push_back(i); });
    std::sort(out.begin(), out.end());
  }

  /// k nearest neighbors of y (including y itself if it is a stored point).
  /// Returns pairs (distance, index) sorted by increasing distance; ties by
  /// index.
  std::vector<std::pair<Scalar, Index>> knn(const Vec& y, int k) const {
    std::vector<std::pair<Scalar, Index>> heap;  // max-heap on (dist2, index)
    if (k <= 0 || pts_.rows() == 0) return heap;
    heap.reserve(static_cast<size_t>(k) + 1);
    knn_walk(0, y, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    for (auto& e : heap) e.first = std::sqrt(e.first);
    return heap;
  }

  /// Nearest stored point to y as (distance, index).
  std::pair<Scalar, Index> nearest(const Vec& y) const {
    auto r = knn(y, 1);
    if (r.empty()) return {std::numeric_limits<Scalar>::infinity(), -1};
    return r.front();
  }

 private:
  struct Node {
    Vec lo, hi;          // bounding box of the points in [begin, end)
    Index begin, end;    // range into perm_
    int left = -1, right = -1;
  };

  int build(Index begin, Index end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.begin = begin;
    n.end = end;
    Vec lo = pts_.row(perm_[begin]).transpose();
    Vec hi = lo;
    for (Index i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(pts_.row(perm_[i]).transpose());
      hi = hi.cwiseMax(pts_.row(perm_[i]).transpose());
    }
    n.lo = lo;
    n.hi = hi;
    if (end - begin <= leaf_size_) return id;

    Index axis;
    (hi - lo).maxCoeff(&axis);
    const Index mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid,
                     perm_.begin() + end, [&](Index a, Index b) {
                       return pts_(a, axis) < pts_(b, axis);
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Scalar box_dist2(const Node& n, const Vec& c) const {
    Scalar d2 = 0;
    for (Index k = 0; k < c.size(); ++k) {
      const Scalar d = std::max({n.lo[k] - c[k], c[k] - n.hi[k], Scalar(0)});
      d2 += d * d;
    }
    return d2;
  }

  Scalar box_far_dist2(const Node& n, const Vec& c) const {
    Scalar d2 = 0;
    for (Index k = 0; k < c.size(); ++k) {
      const Scalar d = std::max(std::abs(n.lo[k] - c[k]), std::abs(n.hi[k] - c[k]));
      d2 += d * d;
    }
    return d2;
  }

  template <class F>
  void walk(int id, const Vec& c, Scalar r, Scalar r2, F& f) const {
    const Node& n = nodes_[id];
    if (box_dist2(n, c) >= r2) return;
    if (n.left < 0) {
      for (Index i = n.begin; i < n.end; ++i) {
        const Index p = perm_[i];
        if ((pts_.row(p).transpose() - c).squaredNorm() < r2) f(p);
      }
      return;
    }
    if (box_far_dist2(n, c) < r2) {  // node entirely inside the open ball
      for (Index i = n.begin; i < n.end; ++i) f(perm_[i]);
      return;
    }
    walk(n.left, c, r, r2, f);
    walk(n.right, c, r, r2, f);
  }

  void knn_walk(int id, const Vec& y, int k,
                std::vector<std::pair<Scalar, Index>>& heap) const {
    const Node& n = nodes_[id];
    if (heap.size() == static_cast<size_t>(k) &&
        box_dist2(n, y) > heap.front().first) {
      return;
    }
    if (n.left < 0) {
      for (Index i = n.begin; i < n.end; ++i) {
        const Index p = perm_[i];
        const Scalar d2 = (pts_.row(p).transpose() - y).squaredNorm();
        const std::pair<Scalar, Index> cand{d2, p};
        if (heap.size() < static_cast<size_t>(k)) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    // Visit the nearer child first.
    const int a = n.left;
    const int b = n.right;
    const Scalar da = box_dist2(nodes_[a], y);
    const Scalar db = box_dist2(nodes_[b], y);
    if (da <= db) {
      knn_walk(a, y, k, heap);
      knn_walk(b, y, k, heap);
    } else {
      knn_walk(b, y, k, heap);
      knn_walk(a, y, k, heap);
    }
  }

  PointMatrix pts_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
  int leaf_size_ = 16;
};

}  // namespace rlab
