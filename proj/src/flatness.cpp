#include "rlab/flatness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlab/errors.hpp"
#include "rlab/geometry.hpp"

namespace rlab {

Scalar alpha(const DiscreteSurface& s, const Vec& x, Scalar r) {
  if (!s.has_normals()) throw MissingNormals("alpha needs normals");
  Scalar mass = 0;
  Vec mean = Vec::Zero(s.ambient_dim());
  thread_local std::vector<Index> idx;
  s.index().range_query({x, r}, idx);
  for (Index i : idx) {
    mass += s.weight(i);
    mean += s.weight(i) * s.normal(i);
  }
  if (!(mass > 0)) throw EmptyBall("alpha over empty ball");
  mean /= mass;
  Scalar acc = 0;
  for (Index i : idx) acc += s.weight(i) * (s.normal(i) - mean).squaredNorm();
  return std::sqrt(acc / mass);
}

DyadicSum carleson_dyadic_sum(const DiscreteSurface& s, const Vec& x,
                              const ScaleLadder& ladder) {
  DyadicSum out;
  const Scalar floor = s.h_min();
  for (int j = 1; j <= ladder.depth; ++j) {
    const Scalar rj = ladder.r(j);
    if (rj < floor) {
      ++out.skipped;
      continue;
    }
    const Scalar a = alpha(s, x, rj);
    out.sum += a * a;
    ++out.levels_used;
  }
  return out;
}

Scalar carleson_integral_over(const DiscreteSurface& s, const Vec& x,
                              Scalar r_low, Scalar r_max, int quad_points) {
  if (!(r_max > r_low) || quad_points < 1) return 0;
  const Scalar a = std::log(r_low), b = std::log(r_max);
  const Scalar dt = (b - a) / quad_points;
  Scalar acc = 0;
  for (int i = 0; i < quad_points; ++i) {
    const Scalar r = std::exp(a + (i + 0.5) * dt);
    const Scalar al = alpha(s, x, r);
    acc += al * al * dt;
  }
  return acc;
}

Scalar carleson_integral(const DiscreteSurface& s, const Vec& x, Scalar r_max,
                         int quad_points) {
  return carleson_integral_over(s, x, s.h_min(), r_max, quad_points);
}

namespace {

struct BallSample {
  PointMatrix pts;           // rows: points in B_r(x)
  Eigen::VectorXd w;
  Scalar mass = 0;
};

BallSample gather_ball(const DiscreteSurface& s, const Vec& x, Scalar r) {
  std::vector<Index> idx;
  s.index().range_query({x, r}, idx);
  BallSample b;
  b.pts.resize(static_cast<Index>(idx.size()), s.ambient_dim());
  b.w.resize(static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    b.pts.row(static_cast<Index>(k)) = s.points().row(idx[k]);
    b.w[static_cast<Index>(k)] = s.weight(idx[k]);
  }
  b.mass = b.w.sum();
  return b;
}

Vec weighted_pca_normal(const BallSample& b) {
  const Index d = b.pts.cols();
  Vec mean = Vec::Zero(d);
  for (Index i = 0; i < b.pts.rows(); ++i) {
    mean += b.w[i] * b.pts.row(i).transpose();
  }
  mean /= b.mass;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim,
                kMaxAmbientDim>
      cov = Eigen::MatrixXd::Zero(d, d);
  for (Index i = 0; i < b.pts.rows(); ++i) {
    const Vec c = b.pts.row(i).transpose() - mean;
    cov += b.w[i] * c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<decltype(cov)> es(cov);
  Vec u = es.eigenvectors().col(0);  // smallest eigenvalue first
  // Fix the sign for determinism.
  Index p;
  u.cwiseAbs().maxCoeff(&p);
  if (u[p] < 0) u = -u;
  return u;
}

// Weighted L1-optimal offset: smallest t with cumulative weight >= half.
Scalar weighted_median(std::vector<std::pair<Scalar, Scalar>>& tw) {
  std::sort(tw.begin(), tw.end());
  Scalar total = 0;
  for (const auto& e : tw) total += e.second;
  Scalar acc = 0;
  for (const auto& e : tw) {
    acc += e.second;
    if (acc >= total / 2) return e.first;
  }
  return tw.back().first;
}

}  // namespace

BetaResult beta1(const DiscreteSurface& s, const Vec& x, Scalar r) {
  const BallSample b = gather_ball(s, x, r);
  if (!(b.mass > 0)) throw EmptyBall("beta1 over empty ball");
  const int n = s.dim_n();
  const Scalar norm = std::pow(r, n + 1);

  std::vector<std::pair<Scalar, Scalar>> tw(b.pts.rows());
  Scalar best_offset = 0;
  auto objective = [&](const Vec& u) {
    for (Index i = 0; i < b.pts.rows(); ++i) {
      tw[i] = {b.pts.row(i).transpose().dot(u), b.w[i]};
    }
    const Scalar c = weighted_median(tw);
    Scalar acc = 0;
    for (Index i = 0; i < b.pts.rows(); ++i) {
      acc += b.w[i] * std::abs(b.pts.row(i).transpose().dot(u) - c);
    }
    best_offset = c;
    return acc / norm;
  };

  auto [val, u] = refine_direction(weighted_pca_normal(b), objective);
  objective(u);  // recompute offset for the winning normal
  BetaResult out;
  out.value = val;
  out.plane = AffinePlane{best_offset * u, u};
  return out;
}

BetaResult beta_inf(const DiscreteSurface& s, const Vec& x, Scalar r) {
  const BallSample b = gather_ball(s, x, r);
  if (!(b.mass > 0)) throw EmptyBall("beta_inf over empty ball");

  auto objective = [&](const Vec& u) {
    Scalar worst = 0;
    for (Index i = 0; i < b.pts.rows(); ++i) {
      worst = std::max(worst,
                       std::abs((b.pts.row(i).transpose() - x).dot(u)));
    }
    return worst / r;
  };

  auto [val, u] = refine_direction(weighted_pca_normal(b), objective);
  BetaResult out;
  out.value = val;
  out.plane = AffinePlane{x, u};
  return out;
}

DyadicEquivalenceReport check_dyadic_equivalence(const DiscreteSurface& s,
                                                 const std::vector<Index>& probes,
                                                 const ScaleLadder& ladder,
                                                 int quad_points) {
  DyadicEquivalenceReport rep;
  const Scalar r_max = ladder.r0;
  // The integral runs over the same scale range the dyadic sum resolves:
  // levels below h_min are skipped there, so they must not enter here either.
  Scalar r_low = r_max;
  for (int j = 1; j <= ladder.depth; ++j) {
    if (ladder.r(j) >= s.h_min()) r_low = ladder.r(j);
  }
  bool first = true;
  for (Index p : probes) {
    DyadicEquivalenceRecord rec;
    rec.probe = p;
    const Vec x = s.point(p);
    rec.dyadic = carleson_dyadic_sum(s, x, ladder).sum;
    rec.integral =
        carleson_integral_over(s, x, r_low, r_max, quad_points);
    if (rec.dyadic < 1e-18 && rec.integral < 1e-18) {
      rec.degenerate = true;
      rec.ratio = 1;
    } else {
      rec.ratio = rec.dyadic / rec.integral;
    }
    if (!rec.degenerate) {
      if (first) {
        rep.max_ratio = rep.min_ratio = rec.ratio;
        first = false;
      } else {
        rep.max_ratio = std::max(rep.max_ratio, rec.ratio);
        rep.min_ratio = std::min(rep.min_ratio, rec.ratio);
      }
    }
    rep.records.push_back(rec);
  }
  return rep;
}

NormalLowerBoundReport check_normal_lower_bound(const DiscreteSurface& s,
                                                const std::vector<Index>& probes,
                                                const std::vector<Scalar>& radii,
                                                Scalar eps1_sq, int quad_points) {
  NormalLowerBoundReport rep;
  rep.eps1_sq = eps1_sq;
  const Scalar floor = s.h_min();
  const Scalar r_max = *std::max_element(radii.begin(), radii.end());
  for (Index p : probes) {
    rep.carleson_measured = std::max(
        rep.carleson_measured, carleson_integral(s, s.point(p), r_max, quad_points));
  }
  rep.in_regime = rep.carleson_measured <= eps1_sq;
  for (Index p : probes) {
    const Vec x = s.point(p);
    for (Scalar r : radii) {
      if (r < floor) {
        ++rep.skipped_subresolution;
        continue;
      }
      NormalLowerBoundRecord rec{p, r, average_normal(s, x, r).norm()};
      rep.records.push_back(rec);
      if (rec.nu_norm < 0.5) rep.violations.push_back(rec);
    }
  }
  return rep;
}

}  // namespace rlab
