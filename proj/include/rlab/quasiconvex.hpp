#pragma once

#include <cstdint>
#include <vector>

#include "rlab/surface.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// Neighborhood graph standing in for rectifiable curves inside the set:
/// vertices are sample indices; edges connect points within the connection
/// radius, weighted by Euclidean length. CSR adjacency.
struct IntrinsicGraph {
  Scalar h = 0;
  std::vector<Index> offsets;     // size n+1
  std::vector<Index> neighbors;
  std::vector<Scalar> lengths;
  std::vector<int> component;     // connected-component labels
  int n_components = 0;
};

IntrinsicGraph build_intrinsic_graph(const DiscreteSurface& s, Scalar h);

/// Shortest-path distances from one source (non-negative weights).
/// Unreachable vertices get infinity.
std::vector<Scalar> graph_distances(const IntrinsicGraph& g,
                                    const DiscreteSurface& s, Index source);

struct QcPair {
  Index a = 0, b = 0;
  Scalar graph_dist = 0;
  Scalar euclid = 0;
  Scalar ratio = 1;
};

struct QcReport {
  bool connected = true;
  int components = 1;
  Scalar kappa = 1;       // max ratio over evaluated pairs; inf if disconnected
  QcPair worst;
  Scalar h = 0;           // connection radius used
  int sources = 0;
  long pairs_evaluated = 0;
};

/// Quasiconvexity estimate: builds the graph at connection radius h (h <= 0
/// picks the default 3x median nearest-neighbor spacing), runs shortest paths
/// from `source_count` seeded sample points, and takes the worst
/// graph-to-Euclidean ratio over all targets at Euclidean separation >= 10 h.
/// Pairs with an unreachable target make the report Disconnected with
/// kappa = infinity.
QcReport quasiconvexity_audit(const DiscreteSurface& s, Scalar h = 0,
                              int source_count = 8, std::uint64_t seed = 11);

}  // namespace rlab
