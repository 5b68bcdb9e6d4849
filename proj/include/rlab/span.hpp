#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlab/geometry.hpp"
#include "rlab/surface.hpp"
#include "rlab/types.hpp"

namespace rlab {

struct EscapeResult {
  Index index = -1;   // sample index of the escape point
  Vec x;
  Scalar r = 0;       // = c0 * r0
};

/// Finds a sample point x in B_{r0}(x0) with dist(x, V) >= 11 c0 r0 and
/// B_{c0 r0}(x) inside B_{2 r0}(x0). Tie-break: maximal distance to V, then
/// lowest index. Rejects subspaces of dimension n (the statement fails there).
/// Throws NoEscapePoint when no sample qualifies.
EscapeResult escape_point(const DiscreteSurface& s, const Subspace& v,
                          const Vec& x0, Scalar r0, Scalar c0);

struct CalibrationResult {
  Scalar c0 = 0;
  bool success = false;   // false: even the smallest grid value failed
  int failures_at_best = 0;
};

/// Largest c0 on the grid {2^-m} such that escape_point succeeds for every
/// probe and every randomly drawn subspace of each dimension k <= n-1
/// (`trials` draws per (probe, k)). The admissible constant is measured, not
/// taken from theory.
CalibrationResult calibrate_c0(const DiscreteSurface& s,
                               const std::vector<Index>& probes, Scalar r0,
                               int trials = 8, std::uint64_t seed = 7,
                               int max_grid_exponent = 12);

/// Writes v in the basis {u_1..u_n} by the triangular (Gram-Schmidt) system,
/// after verifying the admissibility hypotheses:
///   |u_j| <= K0 R,  |u_1| >= k0 R,  dist(u_j, span{u_1..u_{j-1}}) >= k0 R.
/// The returned coefficients satisfy |beta_j| <= K1 |v| / R with
/// K1 = sqrt(n) K0^{n-1} (n-1)! / k0^n. Throws HypothesisViolated naming the
/// failed condition (including v not in the span, detected by residual).
Eigen::VectorXd gs_decompose(std::span<const Vec> u, const Vec& v, Scalar R,
                             Scalar k0, Scalar K0);

/// The admissibility bound constant K1(n, k0, K0).
Scalar gs_coefficient_bound(int n, Scalar k0, Scalar K0);

struct EffectiveSpan {
  std::vector<Index> y_index;  // n+1 sample indices, y_0 = the seed point
  std::vector<Vec> y;
  std::vector<Vec> p;          // centers of mass of B_r(y_l)
  std::vector<Vec> q;          // projections of p onto the plane
  Scalar r = 0;                // separation scale (= c0 * r_k)
};

/// Builds n+1 well-separated projected points that span the plane P:
/// y_0 = seed; y_l escapes the affine hull of the previous projections;
/// q_l = project(center_of_mass(B_r(y_l))). On return the separation
/// invariants hold with margin 5r: |q_1 - q_0| >= 5r and
/// dist(q_l - q_0, span{..}) >= 5r. Propagates NoEscapePoint; throws
/// HypothesisViolated if the separation invariant fails numerically.
EffectiveSpan build_effective_span(const DiscreteSurface& s, const Vec& seed,
                                   Scalar r_k, const AffinePlane& plane,
                                   Scalar c0);

}  // namespace rlab
