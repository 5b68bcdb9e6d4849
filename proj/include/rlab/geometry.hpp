#pragma once

#include <algorithm>
#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// Orthogonal projection of y onto the hyperplane P.
/// Idempotent and 1-Lipschitz.
template <class Derived>
Vec project_to_plane(const Eigen::MatrixBase<Derived>& y, const AffinePlane& P) {
  const Scalar s = (y - P.base).dot(P.normal);
  return y - s * P.normal;
}

/// Distance from y to the hyperplane P; zero iff y lies on P.
template <class Derived>
Scalar dist_to_plane(const Eigen::MatrixBase<Derived>& y, const AffinePlane& P) {
  return std::abs((y - P.base).dot(P.normal));
}

/// Euclidean distance from y to the affine subspace V (k = 0 gives |y - origin|).
template <class Derived>
Scalar dist_to_subspace(const Eigen::MatrixBase<Derived>& y, const Subspace& V) {
  Vec d = y - V.origin;
  for (const Vec& b : V.basis) d -= d.dot(b) * b;
  return d.norm();
}

namespace detail {

// sup over the disk (P intersected with the closed ball B_r(x)) of the
// distance to Q, in closed form. The disk has center project_to_plane(x,P)
// and radius sqrt(r^2 - d(x,P)^2); the distance to Q is affine along the
// disk, so the sup splits into the value at the disk center plus the disk
// radius times the in-plane slope of Q's normal.
inline Scalar sup_dist_on_plane_disk(const AffinePlane& P, const AffinePlane& Q,
                                     const Vec& x, Scalar r) {
  const Scalar d = dist_to_plane(x, P);
  if (!(d < r)) {
    throw EmptyIntersection("plane does not meet B_r(x): dist " +
                            std::to_string(d) + " >= r " + std::to_string(r));
  }
  const Vec xp = project_to_plane(x, P);
  // Clamp guards tangency noise when d is within rounding of r.
  const Scalar rho = std::sqrt(std::max(Scalar(0), r * r - d * d));
  const Scalar at_center = std::abs((xp - Q.base).dot(Q.normal));
  const Scalar in_plane_slope =
      (Q.normal - Q.normal.dot(P.normal) * P.normal).norm();
  return at_center + rho * in_plane_slope;
}

}  // namespace detail

/// Normalized local Hausdorff distance d_{x,r}(P,Q) between two hyperplanes,
/// restricted to B_r(x) and divided by r. Exact (closed form), symmetric,
/// zero iff the planes coincide inside the ball.
/// Throws EmptyIntersection if either plane misses B_r(x).
inline Scalar plane_local_hausdorff(const AffinePlane& P, const AffinePlane& Q,
                                    const Vec& x, Scalar r) {
  const Scalar a = detail::sup_dist_on_plane_disk(P, Q, x, r);
  const Scalar b = detail::sup_dist_on_plane_disk(Q, P, x, r);
  return std::max(a, b) / r;
}

/// Deterministic local search over the unit sphere of directions: axis moves
/// in the tangent frame with a shrinking step, first improvement per round.
/// Returns (best value, best direction); never worse than the start.
template <class F>
std::pair<Scalar, Vec> refine_direction(Vec u0, F&& objective,
                                        Scalar initial_step = 0.5,
                                        int max_evals = 4000);

/// Deterministic orthonormal basis of the orthogonal complement of the unit
/// vector u: returns d-1 columns spanning u^perp (d = ambient dimension).
/// Built from the Householder reflection taking e_p to u, p = argmax |u_i|.
inline Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim,
                     kMaxAmbientDim>
orthonormal_complement(const Vec& u) {
  const Index d = u.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim,
                kMaxAmbientDim>
      out(d, d - 1);
  Index p;
  u.cwiseAbs().maxCoeff(&p);
  Vec v = u;
  v[p] += (u[p] >= 0 ? 1 : -1) * u.norm();
  const Scalar vn2 = v.squaredNorm();
  Index col = 0;
  for (Index j = 0; j < d; ++j) {
    if (j == p) continue;
    Vec e = Vec::Zero(d);
    e[j] = 1;
    e -= (2 * v[j] / vn2) * v;  // H e_j, orthogonal to H e_p (parallel to u)
    out.col(col++) = e;
  }
  return out;
}

template <class F>
std::pair<Scalar, Vec> refine_direction(Vec u0, F&& objective,
                                        Scalar initial_step, int max_evals) {
  Vec best = u0;
  Scalar fbest = objective(best);
  Scalar step = initial_step;
  int evals = 1;
  while (step > 1e-6 && evals < max_evals) {
    const auto frame = orthonormal_complement(best);
    Vec round_best = best;
    Scalar round_val = fbest;
    for (Index c = 0; c < frame.cols(); ++c) {
      for (int sgn : {-1, 1}) {
        Vec cand = (best + sgn * step * frame.col(c)).normalized();
        const Scalar f = objective(cand);
        ++evals;
        if (f < round_val) {
          round_val = f;
          round_best = cand;
        }
      }
    }
    if (round_val < fbest - 1e-18 * (1 + std::abs(fbest))) {
      fbest = round_val;
      best = round_best;
    } else {
      step *= 0.5;
    }
  }
  return {fbest, best};
}

}  // namespace rlab
