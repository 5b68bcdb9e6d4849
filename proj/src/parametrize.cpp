#include "rlab/parametrize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rlab/errors.hpp"
#include "rlab/geometry.hpp"
#include "rlab/log.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"
#include "rlab/spatial_index.hpp"

namespace rlab {

namespace {

// Hausdorff discrepancy between two CCBP planes with the boundary fallback
// used by the builder.
Scalar plane_pair_value(const AffinePlane& pj, const AffinePlane& pi,
                        const Vec& xi, Scalar radius) {
  try {
    return plane_local_hausdorff(pj, pi, xi, radius);
  } catch (const EmptyIntersection&) {
    return dist_to_plane(xi, pj) / radius;
  }
}

// Per-level spatial indexes over the refined centers, plus, for each (k, j),
// the list of candidate partners (value, m, i) sorted by decreasing value so
// the eps' sup can stop at the first partner whose 11-ball contains y.
struct FlowAccel {
  const CCBP& c;
  std::vector<SpatialIndex> level;
  std::vector<std::vector<std::vector<std::tuple<Scalar, int, Index>>>> pairs;

  explicit FlowAccel(const CCBP& ccbp) : c(ccbp) {
    const int levels = c.levels();
    for (int k = 0; k < levels; ++k) level.emplace_back(c.nets.refined[k]);
    pairs.resize(levels);
    for (int k = 1; k < levels; ++k) {
      const Scalar rk = c.r(k);
      pairs[k].resize(c.level_size(k));
      parallel_for(c.level_size(k), [&](Index j) {
        auto& list = pairs[k][j];
        const Vec xj = c.refined_point(k, j);
        for (int m : {k, k - 1}) {
          const Scalar rm = c.r(m);
          const Scalar reach = 10 * rk + 11 * rm;
          for (Index i : level[m].range_query({xj, reach})) {
            if (m == k && i == j) continue;
            const Scalar v = plane_pair_value(
                c.planes[k][j], c.planes[m][i], c.refined_point(m, i), 100 * rm);
            list.emplace_back(v, m, i);
          }
        }
        std::sort(list.begin(), list.end(), std::greater<>());
      });
    }
  }

  Scalar eps_prime(int k, const Vec& y) const {
    Scalar best = 0;
    for (Index j : level[k].range_query({y, 10 * c.r(k)})) {
      for (const auto& [v, m, i] : pairs[k][j]) {
        if (v <= best) break;
        if ((c.refined_point(m, i) - y).norm() < 11 * c.r(m)) {
          best = v;
          break;
        }
      }
    }
    return best;
  }
};

}  // namespace

std::vector<std::pair<Index, Scalar>> partition_weights(const CCBP& c, int k,
                                                        const Vec& y) {
  std::vector<std::pair<Index, Scalar>> out;
  const Scalar rk = c.r(k);
  Scalar total = 0;
  for (Index j = 0; j < c.level_size(k); ++j) {
    const Scalar b = BumpProfile::value((y - c.refined_point(k, j)).norm() / rk);
    if (b > 0) {
      out.emplace_back(j, b);
      total += b;
    }
  }
  const Scalar denom = std::max(total, Scalar(1));
  for (auto& e : out) e.second /= denom;
  return out;
}

namespace {

Vec sigma_k_indexed(const CCBP& c, const SpatialIndex& level_k, int k,
                    const Vec& y) {
  const Scalar rk = c.r(k);
  thread_local std::vector<Index> nbr;
  level_k.range_query({y, 10 * rk}, nbr);
  if (nbr.empty()) return y;
  Scalar total = 0;
  thread_local std::vector<std::pair<Index, Scalar>> bumps;
  bumps.clear();
  for (Index j : nbr) {
    const Scalar b = BumpProfile::value((y - c.refined_point(k, j)).norm() / rk);
    if (b > 0) {
      bumps.emplace_back(j, b);
      total += b;
    }
  }
  if (bumps.empty()) return y;
  const Scalar denom = std::max(total, Scalar(1));
  Vec out = y;
  for (const auto& [j, b] : bumps) {
    out += (b / denom) * (project_to_plane(y, c.planes[k][j]) - y);
  }
  return out;
}

}  // namespace

Vec sigma_k(const CCBP& c, int k, const Vec& y) {
  const SpatialIndex level_k(c.nets.refined[k]);
  return sigma_k_indexed(c, level_k, k, y);
}

Scalar epsilon_prime(const CCBP& c, int k, const Vec& y) {
  if (k < 1 || k >= c.levels()) return 0;
  Scalar best = 0;
  const Scalar rk = c.r(k);
  for (Index j = 0; j < c.level_size(k); ++j) {
    if ((y - c.refined_point(k, j)).norm() >= 10 * rk) continue;
    for (int m : {k, k - 1}) {
      const Scalar rm = c.r(m);
      for (Index i = 0; i < c.level_size(m); ++i) {
        if (m == k && i == j) continue;
        if ((y - c.refined_point(m, i)).norm() >= 11 * rm) continue;
        best = std::max(best, plane_pair_value(c.planes[k][j], c.planes[m][i],
                                               c.refined_point(m, i), 100 * rm));
      }
    }
  }
  return best;
}

namespace {

PointMatrix build_grid(const CCBP& c, Scalar spacing) {
  const Index d = c.sigma0.base.size();
  const Index n = d - 1;
  const auto frame = orthonormal_complement(c.sigma0.normal);
  const Vec center = project_to_plane(c.nets.region_center, c.sigma0);
  const Scalar radius = c.nets.region_radius;
  const long half = static_cast<long>(std::floor(radius / spacing));

  std::vector<Vec> pts;
  std::vector<long> m(n, -half);
  for (;;) {
    Scalar norm2 = 0;
    for (Index a = 0; a < n; ++a) norm2 += Scalar(m[a]) * m[a];
    if (norm2 * spacing * spacing <= radius * radius) {
      Vec z = center;
      for (Index a = 0; a < n; ++a) z += (m[a] * spacing) * frame.col(a);
      pts.push_back(std::move(z));
      if (pts.size() > 4000000) {
        throw BadInput("flow grid exceeds 4e6 points; increase the spacing");
      }
    }
    Index a = 0;
    while (a < n && ++m[a] > half) {
      m[a] = -half;
      ++a;
    }
    if (a == n) break;
  }
  PointMatrix grid(static_cast<Index>(pts.size()), d);
  for (size_t i = 0; i < pts.size(); ++i) {
    grid.row(static_cast<Index>(i)) = pts[i].transpose();
  }
  return grid;
}

}  // namespace

FlowTrace run_flow(const CCBP& c, Scalar grid_spacing, int depth) {
  const int levels = depth < 0 ? c.levels() : std::min(depth + 1, c.levels());
  FlowTrace t;
  t.grid_spacing = grid_spacing;
  t.grid = build_grid(c, grid_spacing);
  t.stages.push_back(t.grid);
  const Index g = t.grid.rows();
  RLAB_INFO("flow grid: " << g << " points, " << levels << " levels");

  const FlowAccel accel(c);
  for (int k = 0; k < levels; ++k) {
    t.r_k.push_back(c.r(k));
    if (k >= 1) {
      Eigen::VectorXd ep(g);
      parallel_for(g, [&](Index i) {
        ep[i] = accel.eps_prime(k, t.stages[k].row(i).transpose());
      });
      t.eps_prime.push_back(std::move(ep));
    }
    PointMatrix next(g, t.grid.cols());
    std::vector<Scalar> step(g);
    parallel_for(g, [&](Index i) {
      const Vec y = t.stages[k].row(i).transpose();
      const Vec z = sigma_k_indexed(c, accel.level[k], k, y);
      next.row(i) = z.transpose();
      step[i] = (z - y).norm();
    });
    Scalar worst = 0;
    Index worst_i = 0;
    for (Index i = 0; i < g; ++i) {
      if (step[i] > worst) {
        worst = step[i];
        worst_i = i;
      }
    }
    if (worst > 10 * c.r(k)) {
      throw FlowDiverged("level " + std::to_string(k) + " moved grid point " +
                         std::to_string(worst_i) + " by " +
                         std::to_string(worst / c.r(k)) + " r_k");
    }
    if (worst > 1.5 * c.r(k)) {
      RLAB_WARN("level " << k << " step " << worst / c.r(k)
                         << " r_k exceeds the 1.5 r_k envelope");
    }
    t.max_step.push_back(worst);
    t.stages.push_back(std::move(next));
  }

  const PointMatrix& last = t.stages.back();
  for (Index i = 0; i < g; ++i) {
    t.max_total_displacement =
        std::max(t.max_total_displacement, (last.row(i) - t.grid.row(i)).norm());
  }
  return t;
}

Scalar bilip_criterion(const FlowTrace& trace) {
  if (trace.eps_prime.empty()) return 0;
  const Index g = trace.grid.rows();
  Scalar worst = 0;
  for (Index i = 0; i < g; ++i) {
    Scalar acc = 0;
    for (const auto& ep : trace.eps_prime) acc += ep[i] * ep[i];
    worst = std::max(worst, acc);
  }
  return worst;
}

BilipEstimate bilip_estimate(const FlowTrace& trace, std::size_t max_pairs,
                             std::uint64_t seed) {
  const Index g = trace.grid.rows();
  if (g < 2) throw BadInput("bilip estimate needs at least 2 grid points");
  const PointMatrix& image = trace.stages.back();

  BilipEstimate best;
  auto consider = [&](Index a, Index b) {
    const Scalar dz = (trace.grid.row(a) - trace.grid.row(b)).norm();
    if (!(dz > 0)) return;
    const Scalar df = (image.row(a) - image.row(b)).norm();
    if (!(df > 0)) {
      throw DegeneratePair("grid points " + std::to_string(a) + " and " +
                           std::to_string(b) + " collapse to one image point");
    }
    const Scalar ratio = std::max(df / dz, dz / df);
    if (ratio > best.k_lower) {
      best.k_lower = ratio;
      best.a = a;
      best.b = b;
    }
  };

  const std::size_t all = static_cast<std::size_t>(g) * (g - 1) / 2;
  if (all <= max_pairs) {
    for (Index a = 0; a < g; ++a) {
      for (Index b = a + 1; b < g; ++b) consider(a, b);
    }
  } else {
    for (std::size_t t = 0; t < max_pairs; ++t) {
      const Index a = static_cast<Index>(splitmix64(seed ^ splitmix64(2 * t)) % g);
      Index b = static_cast<Index>(splitmix64(seed ^ splitmix64(2 * t + 1)) % g);
      if (a == b) b = (b + 1) % g;
      consider(a, b);
    }
  }
  return best;
}

ReifenbergAudit reifenberg_audit(const PointMatrix& image,
                                 const std::vector<Scalar>& radii,
                                 int probe_budget) {
  if (image.rows() < 2) throw BadInput("reifenberg audit needs a point set");
  const Index d = image.cols();
  const SpatialIndex idx(image);

  // Set resolution: median nearest-neighbor spacing.
  std::vector<Scalar> nn(image.rows());
  parallel_for(image.rows(), [&](Index i) {
    const auto k2 = idx.knn(image.row(i).transpose(), 2);
    nn[i] = k2.size() > 1 ? k2[1].first : 0;
  });
  std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
  const Scalar resolution = nn[nn.size() / 2];

  std::vector<Scalar> usable;
  for (Scalar r : radii) {
    if (r >= 4 * resolution) usable.push_back(r);
  }
  if (usable.empty()) {
    throw ResolutionExceeded("all audit radii are below 4x the set resolution " +
                             std::to_string(resolution));
  }

  const Index stride = std::max<Index>(1, image.rows() / probe_budget);
  std::vector<Index> probes;
  for (Index i = 0; i < image.rows(); i += stride) probes.push_back(i);

  // Rim filter for the hole side: the patch is finite, and its outer rim is
  // one-sided emptiness, not a hole. Probes whose ball count falls below 85%
  // of the per-radius median sit near the rim; their hole side is skipped
  // (the sup side is unaffected by the rim and is always computed). A genuine
  // interior hole removes only (rho/r)^2 of the ball and survives the filter;
  // its probes, kept inside the half-radius subdisk, still land on it.
  const Index np = static_cast<Index>(probes.size());
  std::vector<std::vector<Index>> counts(usable.size(),
                                         std::vector<Index>(np, 0));
  parallel_for(np, [&](Index pi) {
    const Vec x = image.row(probes[pi]).transpose();
    for (size_t ri = 0; ri < usable.size(); ++ri) {
      Index c = 0;
      idx.for_each_in_ball({x, usable[ri]}, [&](Index) { ++c; });
      counts[ri][pi] = c;
    }
  });
  std::vector<Scalar> count_floor(usable.size(), 0);
  for (size_t ri = 0; ri < usable.size(); ++ri) {
    std::vector<Index> sorted = counts[ri];
    std::nth_element(sorted.begin(), sorted.begin() + np / 2, sorted.end());
    count_floor[ri] = 0.85 * static_cast<Scalar>(sorted[np / 2]);
  }

  struct Hit {
    Scalar score = 0;
    Scalar radius = 0;
    Index probe = 0;
  };
  std::vector<Hit> hits(probes.size());

  parallel_for(np, [&](Index pi) {
    const Index p = probes[pi];
    const Vec x = image.row(p).transpose();
    Hit h;
    std::vector<Index> ball;
    for (size_t ri = 0; ri < usable.size(); ++ri) {
      const Scalar r = usable[ri];
      idx.range_query({x, r}, ball);
      if (static_cast<Index>(ball.size()) < d) continue;
      const bool interior =
          static_cast<Scalar>(counts[ri][pi]) >= count_floor[ri];

      // PCA normal of the ball, then refine against the one-sided sup.
      Vec mean = Vec::Zero(d);
      for (Index i : ball) mean += image.row(i).transpose();
      mean /= static_cast<Scalar>(ball.size());
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (Index i : ball) {
        const Vec cdiff = image.row(i).transpose() - mean;
        cov += cdiff * cdiff.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
      Vec u0 = es.eigenvectors().col(0);
      auto sup_side = [&](const Vec& u) {
        Scalar worst = 0;
        for (Index i : ball) {
          worst = std::max(worst,
                           std::abs((image.row(i).transpose() - x).dot(u)));
        }
        return worst / r;
      };
      auto [sup_score, u] = refine_direction(u0, sup_side);

      // Hole side: half-radius plane-disk probes vs the set, above a
      // one-resolution slack; interior probes only.
      Scalar hole = 0;
      if (interior) {
        const auto frame = orthonormal_complement(u);
        const int dirs = frame.cols() == 1 ? 2 : 8;
        for (int a = 0; a < dirs; ++a) {
          Vec dir;
          if (frame.cols() == 1) {
            dir = (a == 0 ? 1 : -1) * frame.col(0);
          } else {
            const Scalar ang = 2 * M_PI * a / dirs;
            dir = std::cos(ang) * frame.col(0) + std::sin(ang) * frame.col(1);
          }
          for (Scalar frac : {0.125, 0.25, 0.375, 0.5}) {
            const Vec probe = x + frac * r * dir;
            const Scalar gap = idx.nearest(probe).first;
            hole = std::max(hole, std::max(Scalar(0), gap - resolution) / r);
          }
        }
      }

      const Scalar score = std::max(sup_score, hole);
      if (score > h.score) {
        h = Hit{score, r, p};
      }
    }
    hits[pi] = h;
  });

  ReifenbergAudit out;
  out.probes_used = static_cast<int>(probes.size());
  for (const auto& h : hits) {
    if (h.score > out.worst) {
      out.worst = h.score;
      out.worst_radius = h.radius;
      out.worst_point = image.row(h.probe).transpose();
    }
  }
  if (out.worst_point.size() == 0) out.worst_point = Vec::Zero(d);
  return out;
}

Scalar max_dist_to_image(const DiscreteSurface& s, const Ball& region,
                         const PointMatrix& image) {
  const SpatialIndex idx(image);
  std::vector<Index> inside;
  s.index().range_query(region, inside);
  std::vector<Scalar> gaps(inside.size());
  parallel_for(static_cast<Index>(inside.size()), [&](Index i) {
    gaps[i] = idx.nearest(s.point(inside[i])).first;
  });
  Scalar worst = 0;
  for (Scalar gap : gaps) worst = std::max(worst, gap);
  return worst;
}

}  // namespace rlab
