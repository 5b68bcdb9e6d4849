#include "rlab/ccbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/errors.hpp"
#include "rlab/geometry.hpp"
#include "rlab/log.hpp"
#include "rlab/measure.hpp"
#include "rlab/parallel.hpp"
#include "rlab/spatial_index.hpp"

namespace rlab {

namespace {

// parallel_for that collects per-index exceptions and rethrows the first one
// (by index, so the outcome does not depend on scheduling).
void parallel_for_checked(Index n, const std::function<void(Index)>& fn) {
  std::vector<std::exception_ptr> errs(n);
  parallel_for(n, [&](Index i) {
    try {
      fn(i);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });
  for (Index i = 0; i < n; ++i) {
    if (errs[i]) std::rethrow_exception(errs[i]);
  }
}

}  // namespace

MultiscaleNet build_net(const DiscreteSurface& s, const Vec& region_center,
                        Scalar region_radius, const ScaleLadder& ladder) {
  MultiscaleNet net;
  net.ladder = ladder;
  net.region_center = region_center;
  net.region_radius = region_radius;

  if (ladder.r(ladder.depth) < s.h_min()) {
    throw ResolutionExceeded(
        "deepest scale " + std::to_string(ladder.r(ladder.depth)) +
        " is below the sample resolution " + std::to_string(s.h_min()));
  }

  std::vector<Index> region;
  s.index().range_query({region_center, region_radius}, region);
  if (region.empty()) throw BadInput("analysis region contains no sample points");

  const auto [origin_dist, origin] = s.index().nearest(region_center);
  if (!(origin_dist < region_radius)) {
    throw BadInput("no sample point near the region center");
  }
  net.origin_pos = 0;

  std::vector<std::uint8_t> blocked(s.size());
  for (int k = 0; k <= ladder.depth; ++k) {
    const Scalar sep = Scalar(4) / 3 * ladder.r(k);
    std::fill(blocked.begin(), blocked.end(), 0);
    std::vector<Index> level;
    auto take = [&](Index i) {
      level.push_back(i);
      s.index().for_each_in_ball({s.point(i), sep},
                                 [&](Index j) { blocked[j] = 1; });
    };
    take(origin);  // the designated origin point seeds every level
    for (Index i : region) {
      if (!blocked[i]) take(i);
    }
    PointMatrix refined(static_cast<Index>(level.size()), s.ambient_dim());
    for (size_t j = 0; j < level.size(); ++j) {
      refined.row(static_cast<Index>(j)) = s.points().row(level[j]);
    }
    net.net.push_back(std::move(level));
    net.refined.push_back(std::move(refined));
  }
  return net;
}

PoincarePlaneResult poincare_plane(const DiscreteSurface& s, const Vec& x,
                                   Scalar r) {
  const Vec nu2 = average_normal(s, x, 2 * r);
  const Scalar len = nu2.norm();
  if (len <= 0.1) {
    throw DegenerateNormal("averaged normal has length " + std::to_string(len));
  }
  PoincarePlaneResult out;
  out.plane = AffinePlane{center_of_mass(s, x, r), nu2 / len};
  Scalar mass = 0, acc = 0;
  s.index().for_each_in_ball({x, r}, [&](Index i) {
    mass += s.weight(i);
    acc += s.weight(i) * dist_to_plane(s.point(i), out.plane);
  });
  out.lhs = acc / mass / r;
  out.alpha_2r = alpha(s, x, 2 * r);
  return out;
}

RefineResult refine_point(const DiscreteSurface& s, const Vec& x_tilde,
                          Scalar r_k, const AffinePlane& plane) {
  RefineResult out;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  s.index().for_each_in_ball({x_tilde, r_k / 6}, [&](Index i) {
    const Scalar d = dist_to_plane(s.point(i), plane);
    if (d < best || (d == best && i < out.index)) {
      best = d;
      out.index = i;
    }
  });
  if (out.index < 0) throw EmptyBall("no sample points in B_{r_k/6}(x_tilde)");
  out.x = s.point(out.index);
  out.plane = AffinePlane{out.x, plane.normal};
  return out;
}

namespace {

struct WorstTracker {
  Scalar value = 0;
  std::string item;

  void offer(Scalar v, const std::string& label) {
    if (v > value) {
      value = v;
      item = label;
    }
  }
};

std::string pair_label(const char* cond, int k, Index i, int m, Index j) {
  return std::string(cond) + " k=" + std::to_string(k) + " i=" +
         std::to_string(i) + " vs m=" + std::to_string(m) + " j=" +
         std::to_string(j);
}

// Hausdorff discrepancy with a graceful fallback when the second plane only
// touches the ball boundary (measure-zero configuration).
Scalar pair_discrepancy(const AffinePlane& pi, const AffinePlane& pj,
                        const Vec& xi, Scalar radius) {
  try {
    return plane_local_hausdorff(pi, pj, xi, radius);
  } catch (const EmptyIntersection&) {
    return dist_to_plane(xi, pj) / radius;
  }
}

}  // namespace

CCBP build_ccbp(const DiscreteSurface& s, const Vec& region_center,
                Scalar region_radius, const ScaleLadder& ladder,
                Scalar eps_target, CcbpBuildStats* stats) {
  CCBP c;
  c.nets = build_net(s, region_center, region_radius, ladder);
  c.eps_target = eps_target;

  const int levels = ladder.levels();
  c.planes.resize(levels);
  c.boundary.resize(levels);

  CcbpBuildStats local_stats;
  for (int k = 0; k < levels; ++k) {
    const Scalar rk = ladder.r(k);
    Scalar plane_r = 120 * rk;
    if (plane_r > region_radius) {
      plane_r = region_radius;
      c.clamped_levels.push_back(k);
    }
    const Index nk = c.level_size(k);
    c.planes[k].resize(nk);
    c.boundary[k].resize(nk);
    std::vector<Scalar> ratios(nk, 0);
    // Points whose 2 r_k collar crosses the region boundary carry truncated
    // statistics; they are flagged and kept out of the compatibility sweep.
    // When the collar covers the whole region the level is uniformly coarse
    // and nothing is flagged.
    const bool flag_band = 2 * rk < region_radius;
    parallel_for_checked(nk, [&](Index j) {
      const Vec xt = s.point(c.nets.net[k][j]);
      c.boundary[k][j] =
          flag_band && (xt - region_center).norm() > region_radius - 2 * rk
              ? 1
              : 0;
      const PoincarePlaneResult pp = poincare_plane(s, xt, plane_r);
      const RefineResult rr = refine_point(s, xt, rk, pp.plane);
      c.planes[k][j] = rr.plane;
      c.nets.refined[k].row(j) = rr.x.transpose();
      if (pp.alpha_2r > 1e-14) ratios[j] = pp.lhs / pp.alpha_2r;
    });
    for (Index j = 0; j < nk; ++j) {
      local_stats.max_lhs_over_alpha =
          std::max(local_stats.max_lhs_over_alpha, ratios[j]);
    }
  }
  c.sigma0 = c.planes[0][c.nets.origin_pos];

  // Compatibility sweep. Pairs touching boundary-flagged points are excluded;
  // the flags mark where the region truncates the construction.
  WorstTracker worst;
  std::vector<SpatialIndex> level_index;
  level_index.reserve(levels);
  for (int k = 0; k < levels; ++k) level_index.emplace_back(c.nets.refined[k]);

  std::vector<Index> nbr;
  for (int k = 0; k < levels; ++k) {
    const Scalar rk = ladder.r(k);
    const Index nk = c.level_size(k);
    for (Index i = 0; i < nk; ++i) {
      if (c.boundary[k][i]) continue;
      const Vec xi = c.refined_point(k, i);
      // same scale at distance <= 100 r_k
      level_index[k].range_query({xi, 100 * rk * (1 + 1e-12)}, nbr);
      for (Index j : nbr) {
        if (j == i || c.boundary[k][j]) continue;
        if ((c.refined_point(k, j) - xi).norm() > 100 * rk) continue;
        worst.offer(
            pair_discrepancy(c.planes[k][i], c.planes[k][j], xi, 100 * rk),
            pair_label("same-scale", k, i, k, j));
      }
      // adjacent scale at distance <= 2 r_k
      if (k + 1 < levels) {
        level_index[k + 1].range_query({xi, 2 * rk * (1 + 1e-12)}, nbr);
        for (Index j : nbr) {
          if (c.boundary[k + 1][j]) continue;
          if ((c.refined_point(k + 1, j) - xi).norm() > 2 * rk) continue;
          worst.offer(pair_discrepancy(c.planes[k][i], c.planes[k + 1][j], xi,
                                       20 * rk),
                      pair_label("adjacent-scale", k, i, k + 1, j));
        }
      }
    }
  }
  // Base level against sigma0.
  const Scalar r0 = ladder.r(0);
  for (Index i = 0; i < c.level_size(0); ++i) {
    if (c.boundary[0][i]) continue;
    const Vec xi = c.refined_point(0, i);
    worst.offer(pair_discrepancy(c.planes[0][i], c.sigma0, xi, 100 * r0),
                pair_label("base-plane", 0, i, 0, c.nets.origin_pos));
    worst.offer(dist_to_plane(xi, c.sigma0) / (100 * r0),
                pair_label("base-distance", 0, i, 0, c.nets.origin_pos));
  }

  c.achieved_eps = worst.value;
  c.worst_pair = worst.item;
  if (stats != nullptr) *stats = local_stats;

  if (c.achieved_eps > eps_target) {
    throw EpsilonExceeded("achieved eps " + std::to_string(c.achieved_eps) +
                              " exceeds target " + std::to_string(eps_target) +
                              " (" + c.worst_pair + ")",
                          c.achieved_eps, c.worst_pair);
  }
  RLAB_INFO("ccbp built: eps " << c.achieved_eps << " over "
                               << levels << " levels");
  return c;
}

namespace {

PointMatrix gather_rows(const DiscreteSurface& s, const std::vector<Index>& idx) {
  PointMatrix out(static_cast<Index>(idx.size()), s.ambient_dim());
  for (size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Index>(i)) = s.points().row(idx[i]);
  }
  return out;
}

}  // namespace

CcbpReport verify_ccbp(const DiscreteSurface& s, const CCBP& c) {
  CcbpReport rep;
  const ScaleLadder& ladder = c.nets.ladder;
  const int levels = ladder.levels();
  const Scalar tol = 1e-9;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  auto add = [&](CcbpCheck ck) {
    if (!ck.pass) ++rep.failures;
    rep.checks.push_back(std::move(ck));
  };
  auto item = [](int k, Index j) {
    return "k=" + std::to_string(k) + " j=" + std::to_string(j);
  };

  std::vector<SpatialIndex> net_index, refined_index;
  for (int k = 0; k < levels; ++k) {
    net_index.emplace_back(gather_rows(s, c.nets.net[k]));
    refined_index.emplace_back(c.nets.refined[k]);
  }

  {  // net separation: |x~_i - x~_j| >= (4/3) r_k
    CcbpCheck ck{"net-separation", inf, Scalar(4) / 3, true, "", 0};
    for (int k = 0; k < levels; ++k) {
      for (Index i = 0; i < c.level_size(k); ++i) {
        const auto nn = net_index[k].knn(s.point(c.nets.net[k][i]), 2);
        if (nn.size() < 2) continue;
        const Scalar ratio = nn[1].first / ladder.r(k);
        if (ratio < ck.worst) {
          ck.worst = ratio;
          ck.worst_item = item(k, i);
        }
      }
    }
    ck.pass = !(ck.worst < ck.bound * (1 - tol));
    add(std::move(ck));
  }

  {  // refined separation: |x_i - x_j| >= r_k
    CcbpCheck ck{"refined-separation", inf, 1, true, "", 0};
    for (int k = 0; k < levels; ++k) {
      for (Index i = 0; i < c.level_size(k); ++i) {
        const auto nn = refined_index[k].knn(c.refined_point(k, i), 2);
        if (nn.size() < 2) continue;
        const Scalar ratio = nn[1].first / ladder.r(k);
        if (ratio < ck.worst) {
          ck.worst = ratio;
          ck.worst_item = item(k, i);
        }
      }
    }
    ck.pass = !(ck.worst < ck.bound * (1 - tol));
    add(std::move(ck));
  }

  {  // refinement offset: |x_jk - x~_jk| <= r_k / 6
    CcbpCheck ck{"refine-offset", 0, Scalar(1) / 6, true, "", 0};
    for (int k = 0; k < levels; ++k) {
      for (Index j = 0; j < c.level_size(k); ++j) {
        const Scalar ratio =
            (c.refined_point(k, j) - s.point(c.nets.net[k][j])).norm() /
            ladder.r(k);
        if (ratio > ck.worst) {
          ck.worst = ratio;
          ck.worst_item = item(k, j);
        }
      }
    }
    ck.pass = ck.worst <= ck.bound * (1 + tol);
    add(std::move(ck));
  }

  {  // nested cover: x_{j,k} within 2 r_{k-1} of the previous level
    CcbpCheck ck{"nested-cover", 0, 2, true, "", 0};
    for (int k = 1; k < levels; ++k) {
      for (Index j = 0; j < c.level_size(k); ++j) {
        if (!c.boundary[k].empty() && c.boundary[k][j]) {
          ++ck.excluded;
          continue;
        }
        const auto nn = refined_index[k - 1].nearest(c.refined_point(k, j));
        const Scalar ratio = nn.first / ladder.r(k - 1);
        if (ratio > ck.worst) {
          ck.worst = ratio;
          ck.worst_item = item(k, j);
        }
      }
    }
    ck.pass = ck.worst <= ck.bound * (1 + tol);
    add(std::move(ck));
  }

  {  // coverage: region samples within (3/2) r_k of some refined point
    CcbpCheck ck{"coverage", 0, Scalar(3) / 2, true, "", 0};
    std::vector<Index> region;
    s.index().range_query({c.nets.region_center, c.nets.region_radius}, region);
    for (int k = 0; k < levels; ++k) {
      for (Index p : region) {
        const Scalar ratio =
            refined_index[k].nearest(s.point(p)).first / ladder.r(k);
        if (ratio > ck.worst) {
          ck.worst = ratio;
          ck.worst_item = "k=" + std::to_string(k) + " sample=" + std::to_string(p);
        }
      }
    }
    ck.pass = ck.worst <= ck.bound * (1 + tol);
    add(std::move(ck));
  }

  {  // planes pass through their refined points, with unit normals
    CcbpCheck ck{"plane-through-point", 0, 1e-9, true, "", 0};
    CcbpCheck cn{"unit-normal", 0, 1e-12, true, "", 0};
    for (int k = 0; k < levels; ++k) {
      for (Index j = 0; j < c.level_size(k); ++j) {
        const Scalar d =
            dist_to_plane(c.refined_point(k, j), c.planes[k][j]) / ladder.r(k);
        if (d > ck.worst) {
          ck.worst = d;
          ck.worst_item = item(k, j);
        }
        const Scalar nu = std::abs(c.planes[k][j].normal.norm() - 1);
        if (nu > cn.worst) {
          cn.worst = nu;
          cn.worst_item = item(k, j);
        }
      }
    }
    ck.pass = ck.worst <= ck.bound;
    cn.pass = cn.worst <= cn.bound;
    add(std::move(ck));
    add(std::move(cn));
  }

  // Compatibility conditions, re-measured and compared to the stored eps.
  const Scalar eps_bound = c.achieved_eps * (1 + 1e-9) + 1e-15;
  {
    CcbpCheck same{"same-scale-planes", 0, eps_bound, true, "", 0};
    CcbpCheck adj{"adjacent-scale-planes", 0, eps_bound, true, "", 0};
    std::vector<Index> nbr;
    for (int k = 0; k < levels; ++k) {
      const Scalar rk = ladder.r(k);
      for (Index i = 0; i < c.level_size(k); ++i) {
        if (c.boundary[k][i]) {
          ++same.excluded;
          continue;
        }
        const Vec xi = c.refined_point(k, i);
        refined_index[k].range_query({xi, 100 * rk * (1 + 1e-12)}, nbr);
        for (Index j : nbr) {
          if (j == i || c.boundary[k][j]) continue;
          if ((c.refined_point(k, j) - xi).norm() > 100 * rk) continue;
          const Scalar d =
              pair_discrepancy(c.planes[k][i], c.planes[k][j], xi, 100 * rk);
          if (d > same.worst) {
            same.worst = d;
            same.worst_item = pair_label("same-scale", k, i, k, j);
          }
        }
        if (k + 1 < levels) {
          refined_index[k + 1].range_query({xi, 2 * rk * (1 + 1e-12)}, nbr);
          for (Index j : nbr) {
            if (c.boundary[k + 1][j]) continue;
            if ((c.refined_point(k + 1, j) - xi).norm() > 2 * rk) continue;
            const Scalar d = pair_discrepancy(c.planes[k][i],
                                              c.planes[k + 1][j], xi, 20 * rk);
            if (d > adj.worst) {
              adj.worst = d;
              adj.worst_item = pair_label("adjacent-scale", k, i, k + 1, j);
            }
          }
        }
      }
    }
    same.pass = same.worst <= same.bound;
    adj.pass = adj.worst <= adj.bound;
    add(std::move(same));
    add(std::move(adj));
  }

  {
    CcbpCheck base{"base-plane", 0, eps_bound, true, "", 0};
    CcbpCheck dist{"base-distance", 0, eps_bound, true, "", 0};
    const Scalar r0 = ladder.r(0);
    for (Index i = 0; i < c.level_size(0); ++i) {
      if (c.boundary[0][i]) {
        ++base.excluded;
        continue;
      }
      const Vec xi = c.refined_point(0, i);
      const Scalar d = pair_discrepancy(c.planes[0][i], c.sigma0, xi, 100 * r0);
      if (d > base.worst) {
        base.worst = d;
        base.worst_item = item(0, i);
      }
      const Scalar bd = dist_to_plane(xi, c.sigma0) / (100 * r0);
      if (bd > dist.worst) {
        dist.worst = bd;
        dist.worst_item = item(0, i);
      }
    }
    base.pass = base.worst <= base.bound;
    dist.pass = dist.worst <= dist.bound;
    add(std::move(base));
    add(std::move(dist));
  }

  return rep;
}

namespace {

nlohmann::ordered_json vec_to_json(const Vec& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const nlohmann::ordered_json& a) {
  Vec v(static_cast<Index>(a.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = a[i].get<Scalar>();
  return v;
}

nlohmann::ordered_json plane_to_json(const AffinePlane& p) {
  return {{"base", vec_to_json(p.base)}, {"normal", vec_to_json(p.normal)}};
}

AffinePlane plane_from_json(const nlohmann::ordered_json& j) {
  return AffinePlane{vec_from_json(j.at("base")), vec_from_json(j.at("normal"))};
}

}  // namespace

void to_json(nlohmann::ordered_json& j, const CCBP& c) {
  j = nlohmann::ordered_json{};
  j["ladder"] = {{"r_base", c.nets.ladder.r0},
                 {"ratio", c.nets.ladder.ratio},
                 {"depth", c.nets.ladder.depth}};
  j["region"] = {{"center", vec_to_json(c.nets.region_center)},
                 {"radius", c.nets.region_radius}};
  j["origin_pos"] = c.nets.origin_pos;
  j["eps_target"] = c.eps_target;
  j["achieved_eps"] = c.achieved_eps;
  j["worst_pair"] = c.worst_pair;
  j["sigma0"] = plane_to_json(c.sigma0);
  j["clamped_levels"] = c.clamped_levels;
  auto levels = nlohmann::ordered_json::array();
  for (size_t k = 0; k < c.nets.net.size(); ++k) {
    nlohmann::ordered_json level;
    level["k"] = k;
    level["r_k"] = c.nets.ladder.r(static_cast<int>(k));
    level["net_index"] = c.nets.net[k];
    auto refined = nlohmann::ordered_json::array();
    auto planes = nlohmann::ordered_json::array();
    for (Index i = 0; i < c.nets.refined[k].rows(); ++i) {
      refined.push_back(vec_to_json(c.nets.refined[k].row(i).transpose()));
      planes.push_back(plane_to_json(c.planes[k][i]));
    }
    level["refined"] = std::move(refined);
    level["planes"] = std::move(planes);
    level["boundary"] = c.boundary[k];
    levels.push_back(std::move(level));
  }
  j["levels"] = std::move(levels);
}

CCBP ccbp_from_json(const nlohmann::ordered_json& j) {
  CCBP c;
  c.nets.ladder.r0 = j.at("ladder").at("r_base").get<Scalar>();
  c.nets.ladder.ratio = j.at("ladder").at("ratio").get<Scalar>();
  c.nets.ladder.depth = j.at("ladder").at("depth").get<int>();
  c.nets.region_center = vec_from_json(j.at("region").at("center"));
  c.nets.region_radius = j.at("region").at("radius").get<Scalar>();
  c.nets.origin_pos = j.at("origin_pos").get<int>();
  c.eps_target = j.at("eps_target").get<Scalar>();
  c.achieved_eps = j.at("achieved_eps").get<Scalar>();
  c.worst_pair = j.at("worst_pair").get<std::string>();
  c.sigma0 = plane_from_json(j.at("sigma0"));
  c.clamped_levels = j.at("clamped_levels").get<std::vector<int>>();
  for (const auto& level : j.at("levels")) {
    c.nets.net.push_back(level.at("net_index").get<std::vector<Index>>());
    const auto& refined = level.at("refined");
    const auto& planes = level.at("planes");
    const Index rows = static_cast<Index>(refined.size());
    const Index dim =
        rows > 0 ? static_cast<Index>(refined[0].size())
                 : static_cast<Index>(c.sigma0.base.size());
    PointMatrix m(rows, dim);
    std::vector<AffinePlane> pl;
    for (Index i = 0; i < rows; ++i) {
      m.row(i) = vec_from_json(refined[i]).transpose();
      pl.push_back(plane_from_json(planes[i]));
    }
    c.nets.refined.push_back(std::move(m));
    c.planes.push_back(std::move(pl));
    c.boundary.push_back(level.at("boundary").get<std::vector<std::uint8_t>>());
  }
  return c;
}

}  // namespace rlab
