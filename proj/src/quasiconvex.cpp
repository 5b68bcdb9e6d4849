#include "rlab/quasiconvex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"

namespace rlab {

IntrinsicGraph build_intrinsic_graph(const DiscreteSurface& s, Scalar h) {
  const Index n = s.size();
  IntrinsicGraph g;
  g.h = h;

  std::vector<std::vector<std::pair<Index, Scalar>>> adj(n);
  parallel_for(n, [&](Index i) {
    const Vec p = s.point(i);
    s.index().for_each_in_ball({p, h}, [&](Index j) {
      if (j == i) return;
      adj[i].emplace_back(j, (s.point(j) - p).norm());
    });
    std::sort(adj[i].begin(), adj[i].end());
  });

  g.offsets.resize(n + 1);
  g.offsets[0] = 0;
  for (Index i = 0; i < n; ++i) {
    g.offsets[i + 1] = g.offsets[i] + static_cast<Index>(adj[i].size());
  }
  g.neighbors.resize(g.offsets[n]);
  g.lengths.resize(g.offsets[n]);
  for (Index i = 0; i < n; ++i) {
    Index at = g.offsets[i];
    for (const auto& [j, len] : adj[i]) {
      g.neighbors[at] = j;
      g.lengths[at] = len;
      ++at;
    }
  }

  // Connected components by BFS.
  g.component.assign(n, -1);
  g.n_components = 0;
  std::vector<Index> stack;
  for (Index seed = 0; seed < n; ++seed) {
    if (g.component[seed] >= 0) continue;
    const int label = g.n_components++;
    stack.push_back(seed);
    g.component[seed] = label;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        const Index w = g.neighbors[e];
        if (g.component[w] < 0) {
          g.component[w] = label;
          stack.push_back(w);
        }
      }
    }
  }
  return g;
}

std::vector<Scalar> graph_distances(const IntrinsicGraph& g,
                                    const DiscreteSurface& s, Index source) {
  (void)s;
  const Index n = static_cast<Index>(g.offsets.size()) - 1;
  std::vector<Scalar> dist(n, std::numeric_limits<Scalar>::infinity());
  using Entry = std::pair<Scalar, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  dist[source] = 0;
  heap.emplace(0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (Index e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const Index w = g.neighbors[e];
      const Scalar nd = d + g.lengths[e];
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
  return dist;
}

QcReport quasiconvexity_audit(const DiscreteSurface& s, Scalar h,
                              int source_count, std::uint64_t seed) {
  QcReport rep;
  if (!(h > 0)) h = 3 * s.median_nn_spacing();
  rep.h = h;

  const IntrinsicGraph g = build_intrinsic_graph(s, h);
  rep.components = g.n_components;
  rep.connected = g.n_components == 1;

  const Index n = s.size();
  std::vector<Index> sources;
  for (int t = 0; t < source_count; ++t) {
    sources.push_back(static_cast<Index>(splitmix64(seed ^ splitmix64(t)) % n));
  }
  rep.sources = static_cast<int>(sources.size());

  std::vector<QcPair> per_source(sources.size());
  std::vector<std::uint8_t> unreachable(sources.size(), 0);
  parallel_for(static_cast<Index>(sources.size()), [&](Index si) {
    const Index src = sources[si];
    const auto dist = graph_distances(g, s, src);
    const Vec p = s.point(src);
    QcPair best;
    best.a = src;
    best.ratio = 0;
    for (Index t = 0; t < n; ++t) {
      const Scalar eu = (s.point(t) - p).norm();
      if (eu < 10 * h) continue;  // short pairs are trivially near-Euclidean
      if (!std::isfinite(dist[t])) {
        unreachable[si] = 1;
        best.b = t;
        best.euclid = eu;
        continue;
      }
      const Scalar ratio = dist[t] / eu;
      if (ratio > best.ratio) {
        best.ratio = ratio;
        best.b = t;
        best.euclid = eu;
        best.graph_dist = dist[t];
      }
    }
    per_source[si] = best;
  });

  rep.kappa = 0;
  long evaluated = 0;
  for (size_t si = 0; si < sources.size(); ++si) {
    ++evaluated;
    if (unreachable[si]) {
      rep.kappa = std::numeric_limits<Scalar>::infinity();
      rep.worst = per_source[si];
      rep.connected = false;
    }
    if (!std::isinf(rep.kappa) && per_source[si].ratio > rep.kappa) {
      rep.kappa = per_source[si].ratio;
      rep.worst = per_source[si];
    }
  }
  rep.pairs_evaluated = evaluated;
  if (rep.kappa == 0) rep.kappa = 1;  // no valid pairs at the separation floor
  return rep;
}

}  // namespace rlab
