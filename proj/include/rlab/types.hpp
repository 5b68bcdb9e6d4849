#pragma once

#include <Eigen/Dense>

#include <vector>

namespace rlab {

using Scalar = double;
using Index = Eigen::Index;

// Ambient dimension n+1 is a runtime parameter in [2, kMaxAmbientDim].
inline constexpr int kMaxAmbientDim = 8;

// Ambient vector: runtime-sized but stack-allocated (no heap per vector).
template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbientDim, 1>;
using Vec = VecT<Scalar>;

// Point sets are stored row-per-point; row-major so a row is contiguous.
using PointMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Open ball B_r(c).
struct Ball {
  Vec center;
  Scalar radius = 0;
};

/// Affine hyperplane of codimension 1: a base point on the plane plus a unit
/// normal. All planes in this library are n-dimensional subsets of R^{n+1}.
struct AffinePlane {
  Vec base;
  Vec normal;

  // Builds a plane through `base` with `normal` normalized to unit length.
  static AffinePlane through(Vec base, Vec normal) {
    normal.normalize();
    return AffinePlane{std::move(base), std::move(normal)};
  }
};

/// Affine k-dimensional subspace, 0 <= k <= n-1, stored as an origin plus an
/// orthonormal basis of the direction space (empty basis = a single point).
struct Subspace {
  Vec origin;
  std::vector<Vec> basis;

  Index dim() const { return static_cast<Index>(basis.size()); }
};

/// Multiscale ladder of radii r_j = r0 * ratio^{-j}, j = 0..depth.
struct ScaleLadder {
  Scalar r0 = 0.2;
  Scalar ratio = 3.0;
  int depth = 3;

  Scalar r(int j) const { return r0 * std::pow(ratio, -j); }
  int levels() const { return depth + 1; }  // scales r_0 .. r_depth
};

}  // namespace rlab
