#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rlab/surface.hpp"
#include "rlab/types.hpp"

namespace rlab {

enum class ZooShape {
  kPlane,
  kSphere,
  kGraphSin,
  kGraphMultiscale,
  kSnowflakeLike,
  kTwoSheet,
  kHoledPlane,
};

ZooShape parse_shape(const std::string& name);
std::string shape_name(ZooShape s);

/// Deterministic generator spec. Graph shapes live over the parameter box
/// [-1/2, 1/2]^n; the sphere uses an area-preserving parametrization. All
/// shapes carry analytic unit normals and analytic area-element weights.
struct ZooSpec {
  ZooShape shape = ZooShape::kPlane;
  int n = 2;                 // intrinsic dimension (ambient is n+1)
  Index samples = 10000;     // requested count; rounded up to a full grid
  std::uint64_t seed = 1;

  Scalar amplitude = 0.02;   // a
  Scalar wavelength = 0.05;  // l in a*sin(t/l)
  Scalar radius = 1.0;       // sphere radius R
  Scalar lambda = 4.0;       // lacunary frequency ratio
  Scalar gamma = 0.0;        // lacunary slope decay; 0 = self-similar slopes
  int modes = 6;             // lacunary mode count M
  Scalar sheet_gap = 0.05;   // two-sheet half-gap
  std::vector<std::pair<Vec, Scalar>> holes;  // (center in parameter space, radius)
};

/// Samples the spec quasi-uniformly (stratified jittered parameter grid).
/// Same spec + seed gives a bit-identical surface. Throws BadSpec.
DiscreteSurface generate(const ZooSpec& spec);

/// Machine-readable expectations for the acceptance harness.
struct ZooExpectations {
  enum class Carleson { kZero, kFinite, kGrowing };
  Carleson carleson = Carleson::kZero;
  bool connected = true;
  Scalar kappa_hint = 1.0;          // expected quasiconvexity constant
  Scalar alpha_scaling_exponent = 1.0;  // alpha(x,r) ~ r^e; 0 = scale-invariant
  Scalar analytic_total_area = 0.0;     // exact when closed-form, else quadrature
};

ZooExpectations describe(const ZooSpec& spec);

}  // namespace rlab
