#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlab/surface.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// mu(B) = sum of weights of sample points inside the open ball.
Scalar mu_ball(const DiscreteSurface& s, const Ball& b);

/// Weighted mean of the per-point values f over B_r(x). Throws EmptyBall when
/// mu(B_r(x)) = 0.
Scalar average(const DiscreteSurface& s, std::span<const Scalar> f, const Vec& x,
               Scalar r);

/// Componentwise average of the unit normals over B_r(x); |result| <= 1.
/// Throws EmptyBall / MissingNormals.
Vec average_normal(const DiscreteSurface& s, const Vec& x, Scalar r);

/// Weighted mean position over B_r(x); lies strictly inside the ball.
Vec center_of_mass(const DiscreteSurface& s, const Vec& x, Scalar r);

struct AhlforsRecord {
  Index probe;    // sample index of the ball center
  Scalar r;
  Scalar ratio;   // mu(B_r) / r^n
  bool flagged;   // empty ball or other degeneracy
};

struct AhlforsAudit {
  Scalar ratio_min = 0;
  Scalar ratio_max = 0;
  Scalar c_m = 1;          // estimated regularity constant
  Scalar h_min = 0;        // resolution floor used
  int skipped_radii = 0;   // radii below h_min, refused
  int flagged = 0;
  std::vector<AhlforsRecord> records;
};

/// Samples mu(B_r(x))/r^n over `probe_count` probes drawn (deterministically
/// from `seed`) among the sample points and the given radii; radii below the
/// sample resolution are refused and counted. When `probe_region` is given,
/// probes are restricted to sample points inside it, which keeps boundary
/// truncation out of the statistics.
AhlforsAudit ahlfors_audit(const DiscreteSurface& s,
                           const std::vector<Scalar>& radii, int probe_count,
                           std::uint64_t seed = 1,
                           const std::optional<Ball>& probe_region = {});

}  // namespace rlab
