#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rlab/ccbp.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// Radial bump: 1 on [0,8], 0 on [10,inf), C^1 monotone in between
/// (cubic smoothstep on [8,10]).
struct BumpProfile {
  static Scalar value(Scalar s) {
    if (s <= 8) return 1;
    if (s >= 10) return 0;
    const Scalar t = (s - 8) / 2;
    return 1 - t * t * (3 - 2 * t);
  }
  // sup |phi'|, attained at s = 9.
  static Scalar derivative_bound() { return 0.75; }
};

/// Normalized bump weights at y for level k: theta_j = phi(|y - x_jk|/r_k) /
/// max(sum, 1). Sparse: only centers within 10 r_k appear.
std::vector<std::pair<Index, Scalar>> partition_weights(const CCBP& c, int k,
                                                        const Vec& y);

/// One smoothing step: y + sum_j theta_jk(y) (proj_jk(y) - y). Fixes y when no
/// ball is within 10 r_k.
Vec sigma_k(const CCBP& c, int k, const Vec& y);

/// Worst plane-to-plane discrepancy seen by a point at level k >= 1:
/// sup of d_{x_im,100 r_m}(P_jk, P_im) over j at level k and i at levels
/// {k, k-1} whose 10B_jk resp. 11B_im contain y; 0 outside those supports.
Scalar epsilon_prime(const CCBP& c, int k, const Vec& y);

struct FlowTrace {
  PointMatrix grid;                       // z on sigma0 (stage 0)
  std::vector<PointMatrix> stages;        // f_k(z), k = 0..K (stage 0 = grid)
  std::vector<Eigen::VectorXd> eps_prime; // eps'_k(f_k(z)) for k = 1..K-1
  Scalar grid_spacing = 0;
  std::vector<Scalar> max_step;           // max |f_{k+1}(z) - f_k(z)| per level
  std::vector<Scalar> r_k;                // ladder scales
  Scalar max_total_displacement = 0;      // max |f(z) - z|
};

/// Evaluates the composed flow on a grid of sigma0 within the region.
/// Asserts |f_{k+1}(z) - f_k(z)| <= 1.5 r_k; throws FlowDiverged beyond
/// 10 r_k. depth < 0 runs every ladder level.
FlowTrace run_flow(const CCBP& c, Scalar grid_spacing, int depth = -1);

/// N = max over grid points of sum_k eps'_k(f_k(z))^2, the square function
/// whose uniform bound drives the bi-Lipschitz conclusion.
Scalar bilip_criterion(const FlowTrace& trace);

struct BilipEstimate {
  Scalar k_lower = 1;   // max of ratio and inverse ratio over sampled pairs
  Index a = 0, b = 0;   // worst pair (grid row indices)
};

/// Empirical bi-Lipschitz constant over grid pairs: all pairs up to
/// `max_pairs`, otherwise that many seeded random pairs. Throws DegeneratePair
/// when two distinct grid points collapse to the same image.
BilipEstimate bilip_estimate(const FlowTrace& trace,
                             std::size_t max_pairs = 1000000,
                             std::uint64_t seed = 0x5EED);

struct ReifenbergAudit {
  Scalar worst = 0;       // max two-sided flatness score over (probe, radius)
  Vec worst_point;
  Scalar worst_radius = 0;
  int probes_used = 0;
};

/// Two-sided flatness of a point set: per probe point and ladder radius, fits
/// a plane through the point (PCA-initialized, locally refined) and scores
/// max( sup dist(points in ball, plane)/r , hole term ), where the hole term
/// measures plane-disk probes' distance to the set above one grid-spacing
/// allowance. Radii below 4x the set's resolution are refused.
ReifenbergAudit reifenberg_audit(const PointMatrix& image,
                                 const std::vector<Scalar>& radii,
                                 int probe_budget = 256);

/// Largest distance from sample points inside the region to the image point
/// set (containment audit of the flow image).
Scalar max_dist_to_image(const DiscreteSurface& s, const Ball& region,
                         const PointMatrix& image);

}  // namespace rlab
