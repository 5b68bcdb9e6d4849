#pragma once

#include <optional>
#include <string>

#include "rlab/spatial_index.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// Weighted point sample of an n-dimensional set M in R^{n+1}: positions,
/// optional unit normals, and positive quadrature weights standing in for the
/// surface measure. Immutable after construction; safe for concurrent reads.
class DiscreteSurface {
 public:
  DiscreteSurface() = default;

  /// Validates and indexes the sample. `normals` may have zero rows (absent).
  /// Throws BadInput on shape mismatch, non-positive weights, or non-unit
  /// normals (tolerance 1e-9).
  static DiscreteSurface from_data(PointMatrix points, PointMatrix normals,
                                   Eigen::VectorXd weights);

  /// Reads the CSV interchange format. Header: x0,...,xn[,nu0,...,nun][,w].
  /// Missing weights are estimated from k-NN ball areas (k = 8); normals stay
  /// absent if missing and normal-requiring operations will throw.
  static DiscreteSurface load_csv(const std::string& path);

  void save_csv(const std::string& path) const;

  Index size() const { return index_.size(); }
  int ambient_dim() const { return static_cast<int>(index_.dim()); }
  int dim_n() const { return ambient_dim() - 1; }

  Vec point(Index i) const { return index_.point(i); }
  Vec normal(Index i) const { return normals_.row(i).transpose(); }
  Scalar weight(Index i) const { return weights_[i]; }

  bool has_normals() const { return normals_.rows() > 0; }
  const PointMatrix& points() const { return index_.points(); }
  const PointMatrix& normals() const { return normals_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const SpatialIndex& index() const { return index_; }

  Scalar total_weight() const { return total_weight_; }

  /// Median nearest-neighbor spacing of the sample.
  Scalar median_nn_spacing() const;

  /// Minimum resolvable radius: 3x the median nearest-neighbor spacing.
  /// Audits refuse (flag) radii below this.
  Scalar h_min() const { return 3 * median_nn_spacing(); }

 private:
  SpatialIndex index_;
  PointMatrix normals_;
  Eigen::VectorXd weights_;
  Scalar total_weight_ = 0;
  mutable Scalar median_nn_ = -1;  // lazy cache
};

}  // namespace rlab
