#include "rlab/span.hpp"

#include <algorithm>
#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/measure.hpp"
#include "rlab/rng.hpp"

namespace rlab {

EscapeResult escape_point(const DiscreteSurface& s, const Subspace& v,
                          const Vec& x0, Scalar r0, Scalar c0) {
  if (v.dim() > s.dim_n() - 1) {
    throw HypothesisViolated("escape subspace dimension must be <= n-1");
  }
  if (!(c0 > 0) || c0 > 0.5) throw HypothesisViolated("need 0 < c0 <= 1/2");
  const Scalar r = c0 * r0;

  EscapeResult best;
  Scalar best_dist = -1;
  s.index().for_each_in_ball({x0, r0}, [&](Index i) {
    const Vec p = s.point(i);
    if ((p - x0).norm() + r > 2 * r0) return;  // keep B_r(x) inside B_{2r0}(x0)
    const Scalar d = dist_to_subspace(p, v);
    if (d < 11 * r) return;
    if (d > best_dist || (d == best_dist && i < best.index)) {
      best_dist = d;
      best.index = i;
      best.x = p;
    }
  });
  if (best.index < 0) {
    throw NoEscapePoint("no sample escapes the 11r-neighbourhood (c0 = " +
                        std::to_string(c0) + ")");
  }
  best.r = r;
  return best;
}

namespace {

Subspace random_subspace(int ambient, int k, const Vec& through,
                         std::uint64_t seed) {
  auto eng = make_engine(seed, 0);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  Subspace v;
  v.origin = through;
  for (int j = 0; j < k; ++j) {
    Vec b(ambient);
    for (;;) {
      for (int c = 0; c < ambient; ++c) b[c] = gauss(eng);
      for (const Vec& prev : v.basis) b -= b.dot(prev) * prev;
      const Scalar len = b.norm();
      if (len > 1e-6) {
        b /= len;
        break;
      }
    }
    v.basis.push_back(b);
  }
  return v;
}

}  // namespace

CalibrationResult calibrate_c0(const DiscreteSurface& s,
                               const std::vector<Index>& probes, Scalar r0,
                               int trials, std::uint64_t seed,
                               int max_grid_exponent) {
  const int n = s.dim_n();
  CalibrationResult out;
  for (int m = 1; m <= max_grid_exponent; ++m) {
    const Scalar c0 = std::pow(2.0, -m);
    int failures = 0;
    for (Index p : probes) {
      const Vec x0 = s.point(p);
      for (int k = 0; k <= n - 1 && failures == 0; ++k) {
        for (int t = 0; t < trials && failures == 0; ++t) {
          const Subspace v = random_subspace(
              s.ambient_dim(), k, x0,
              seed ^ splitmix64(1000003 * p + 1009 * k + t));
          try {
            escape_point(s, v, x0, r0, c0);
          } catch (const NoEscapePoint&) {
            ++failures;
          }
        }
      }
      if (failures > 0) break;
    }
    if (failures == 0) {
      out.c0 = c0;
      out.success = true;
      return out;
    }
    out.c0 = c0;
    out.failures_at_best = failures;
  }
  out.success = false;
  return out;
}

Scalar gs_coefficient_bound(int n, Scalar k0, Scalar K0) {
  return std::sqrt(Scalar(n)) * std::pow(K0, n - 1) * std::tgamma(Scalar(n)) /
         std::pow(k0, n);
}

Eigen::VectorXd gs_decompose(std::span<const Vec> u, const Vec& v, Scalar R,
                             Scalar k0, Scalar K0) {
  const int n = static_cast<int>(u.size());
  if (n < 1) throw HypothesisViolated("need at least one vector");
  const Index d = v.size();
  if (!(0 < k0 && k0 < K0)) throw HypothesisViolated("need 0 < k0 < K0");

  for (int j = 0; j < n; ++j) {
    if (u[j].norm() > K0 * R * (1 + 1e-12)) {
      throw HypothesisViolated("|u_" + std::to_string(j + 1) + "| > K0 R");
    }
  }
  if (u[0].norm() < k0 * R * (1 - 1e-12)) {
    throw HypothesisViolated("|u_1| < k0 R");
  }

  // Gram-Schmidt; the triangular coefficients are exactly the lambda_j^i of
  // the admissibility argument, with lambda_j^j = dist(u_j, span{u_1..u_{j-1}}).
  Eigen::MatrixXd e(d, n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);  // upper triangular
  for (int j = 0; j < n; ++j) {
    Vec w = u[j];
    for (int i = 0; i < j; ++i) {
      a(i, j) = u[j].dot(e.col(i));
      w -= a(i, j) * e.col(i);
    }
    const Scalar diag = w.norm();
    if (j > 0 && diag < k0 * R * (1 - 1e-12)) {
      throw HypothesisViolated("u_" + std::to_string(j + 1) +
                               " inside the k0 R neighbourhood of the span");
    }
    if (!(diag > 0)) throw HypothesisViolated("degenerate vector set");
    a(j, j) = diag;
    e.col(j) = w / diag;
  }

  Eigen::VectorXd alpha(n);
  for (int i = 0; i < n; ++i) alpha[i] = v.dot(e.col(i));
  const Eigen::VectorXd beta =
      a.triangularView<Eigen::Upper>().solve(alpha);

  Vec recon = Vec::Zero(d);
  for (int j = 0; j < n; ++j) recon += beta[j] * u[j];
  if ((recon - v).norm() > 1e-10 * std::max(Scalar(1), v.norm())) {
    throw HypothesisViolated("v is not in span{u_1..u_n}");
  }
  return beta;
}

EffectiveSpan build_effective_span(const DiscreteSurface& s, const Vec& seed,
                                   Scalar r_k, const AffinePlane& plane,
                                   Scalar c0) {
  const int n = s.dim_n();
  EffectiveSpan out;
  out.r = c0 * r_k;

  auto push = [&](Index idx, const Vec& y) {
    out.y_index.push_back(idx);
    out.y.push_back(y);
    out.p.push_back(center_of_mass(s, y, out.r));
    out.q.push_back(project_to_plane(out.p.back(), plane));
  };

  const auto seed_nn = s.index().nearest(seed);
  push(seed_nn.second, seed);

  Subspace v;
  v.origin = out.q[0];
  for (int l = 1; l <= n; ++l) {
    const EscapeResult esc = escape_point(s, v, seed, r_k, c0);
    push(esc.index, esc.x);
    // Separation invariant, checked directly (margin 5r on the projections).
    const Vec rel = out.q[l] - out.q[0];
    const Scalar sep = l == 1 ? rel.norm()
                              : dist_to_subspace(out.q[l], v);
    if (sep < 5 * out.r) {
      throw HypothesisViolated(
          "projected spanning point " + std::to_string(l) +
          " is only " + std::to_string(sep / out.r) + "r from the span");
    }
    Vec b = rel;
    for (const Vec& prev : v.basis) b -= b.dot(prev) * prev;
    v.basis.push_back(b.normalized());
  }
  return out;
}

}  // namespace rlab
