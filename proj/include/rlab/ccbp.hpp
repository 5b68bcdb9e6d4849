#pragma once

#include <string>
#include <vector>

#include "rlab/flatness.hpp"
#include "rlab/surface.hpp"
#include "rlab/types.hpp"

#include <json.hpp>

namespace rlab {

/// Per-scale maximal separated nets. Net points are sample indices; refined
/// points start at the net positions and are moved by the plane construction
/// (distance at most r_k/6).
struct MultiscaleNet {
  ScaleLadder ladder;
  Vec region_center;
  Scalar region_radius = 0;
  int origin_pos = 0;                    // designated origin within level 0
  std::vector<std::vector<Index>> net;   // per level: indices into S
  std::vector<PointMatrix> refined;      // per level: refined positions x_jk
};

/// Greedy maximal (4/3) r_k-separated subsets of the sample inside the region,
/// one per ladder level, deterministic (ascending sample index, seeded with
/// the sample point nearest the region center). Throws ResolutionExceeded when
/// the deepest scale is below the sample resolution.
MultiscaleNet build_net(const DiscreteSurface& s, const Vec& region_center,
                        Scalar region_radius, const ScaleLadder& ladder);

struct PoincarePlaneResult {
  AffinePlane plane;   // through the local center of mass, normal = averaged nu
  Scalar lhs = 0;      // mean of d(y, plane)/r over B_r
  Scalar alpha_2r = 0; // oscillation at the doubled radius (the bound's rhs core)
};

/// The averaged-normal plane at (x, r): passes through center_of_mass(B_r(x)),
/// normal nu_{x,2r}/|nu_{x,2r}|. Throws DegenerateNormal when |nu_{x,2r}| <=
/// 0.1 (the averaged normal no longer determines a direction).
PoincarePlaneResult poincare_plane(const DiscreteSurface& s, const Vec& x,
                                   Scalar r);

struct RefineResult {
  Index index = -1;
  Vec x;
  AffinePlane plane;  // parallel translate of the input plane through x
};

/// Picks the sample point in B_{r_k/6}(x_tilde) closest to the plane
/// (tie-break lowest index) and translates the plane through it.
RefineResult refine_point(const DiscreteSurface& s, const Vec& x_tilde,
                          Scalar r_k, const AffinePlane& plane);

/// The coherent collection: nets, one plane per (j,k), the reference plane
/// sigma0 at the designated origin, and the worst compatibility discrepancy
/// actually achieved.
struct CCBP {
  MultiscaleNet nets;
  std::vector<std::vector<AffinePlane>> planes;
  AffinePlane sigma0;
  Scalar achieved_eps = 0;
  Scalar eps_target = 0;
  std::string worst_pair;
  std::vector<std::vector<std::uint8_t>> boundary;  // region-boundary flags
  std::vector<int> clamped_levels;  // levels whose plane radius hit the region

  Scalar r(int k) const { return nets.ladder.r(k); }
  int levels() const { return nets.ladder.levels(); }
  Index level_size(int k) const { return static_cast<Index>(nets.net[k].size()); }
  Vec refined_point(int k, Index j) const {
    return nets.refined[k].row(j).transpose();
  }
};

struct CcbpBuildStats {
  Scalar max_lhs_over_alpha = 0;  // worst lhs / alpha(x,2r) seen (plane quality)
  int degenerate_skipped = 0;
};

/// Runs build_net, constructs the per-(j,k) planes (radius 120 r_k clamped to
/// the region radius, with the level recorded when clamped), refines the
/// points, picks sigma0 at the designated origin, and measures achieved_eps
/// over the same-scale, adjacent-scale, and base-plane compatibility
/// conditions (plane distances at radii 100 r_k and 20 r_k; base-point
/// distances normalized by 100 r_0). Pairs involving boundary-flagged points
/// are excluded from achieved_eps. Throws EpsilonExceeded when achieved_eps >
/// eps_target.
CCBP build_ccbp(const DiscreteSurface& s, const Vec& region_center,
                Scalar region_radius, const ScaleLadder& ladder,
                Scalar eps_target, CcbpBuildStats* stats = nullptr);

struct CcbpCheck {
  std::string name;
  Scalar worst = 0;       // worst margin (semantics depend on the condition)
  Scalar bound = 0;       // the value `worst` must not exceed
  bool pass = true;
  std::string worst_item;
  int excluded = 0;       // boundary-flagged items skipped
};

struct CcbpReport {
  std::vector<CcbpCheck> checks;
  int failures = 0;
};

/// Re-checks every net and plane condition from scratch, independent of the
/// builder's bookkeeping. The compatibility conditions are compared against
/// the stored achieved_eps; geometric net conditions against their exact
/// constants.
CcbpReport verify_ccbp(const DiscreteSurface& s, const CCBP& c);

void to_json(nlohmann::ordered_json& j, const CCBP& c);
CCBP ccbp_from_json(const nlohmann::ordered_json& j);

}  // namespace rlab
