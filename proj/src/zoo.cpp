#include "rlab/zoo.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

ZooShape parse_shape(const std::string& name) {
  if (name == "plane") return ZooShape::kPlane;
  if (name == "sphere") return ZooShape::kSphere;
  if (name == "graph-sin") return ZooShape::kGraphSin;
  if (name == "graph-multiscale") return ZooShape::kGraphMultiscale;
  if (name == "snowflake-like") return ZooShape::kSnowflakeLike;
  if (name == "two-sheet") return ZooShape::kTwoSheet;
  if (name == "holed-plane") return ZooShape::kHoledPlane;
  throw BadSpec("unknown shape: " + name);
}

std::string shape_name(ZooShape s) {
  switch (s) {
    case ZooShape::kPlane: return "plane";
    case ZooShape::kSphere: return "sphere";
    case ZooShape::kGraphSin: return "graph-sin";
    case ZooShape::kGraphMultiscale: return "graph-multiscale";
    case ZooShape::kSnowflakeLike: return "snowflake-like";
    case ZooShape::kTwoSheet: return "two-sheet";
    case ZooShape::kHoledPlane: return "holed-plane";
  }
  return "?";
}

namespace {

struct HeightField {
  // u(t) and du/dt_0 (graph families only wiggle along the first parameter).
  std::function<Scalar(Scalar)> u;
  std::function<Scalar(Scalar)> du;
};

HeightField make_height(const ZooSpec& spec) {
  switch (spec.shape) {
    case ZooShape::kPlane:
    case ZooShape::kHoledPlane:
    case ZooShape::kTwoSheet:
      return {[](Scalar) { return 0.0; }, [](Scalar) { return 0.0; }};
    case ZooShape::kGraphSin: {
      const Scalar a = spec.amplitude, l = spec.wavelength;
      if (!(l > 0)) throw BadSpec("graph-sin needs wavelength > 0");
      return {[a, l](Scalar t) { return a * std::sin(t / l); },
              [a, l](Scalar t) { return a / l * std::cos(t / l); }};
    }
    case ZooShape::kGraphMultiscale:
    case ZooShape::kSnowflakeLike: {
      const Scalar a = spec.amplitude, lam = spec.lambda, g = spec.gamma;
      const int m = spec.modes;
      if (!(lam > 1) || m < 1) throw BadSpec("lacunary graph needs lambda > 1, modes >= 1");
      // Deterministic phases on their own seed stream, independent of the
      // per-cell jitter streams.
      std::vector<Scalar> phase(m);
      for (int j = 0; j < m; ++j) {
        phase[j] = 2 * M_PI *
                   (splitmix64(spec.seed ^ splitmix64(0x9e0 + j)) >> 11) *
                   0x1.0p-53;
      }
      auto u = [a, lam, g, m, phase](Scalar t) {
        Scalar s = 0;
        for (int j = 0; j < m; ++j) {
          s += std::pow(lam, -j * (1 + g)) * std::sin(std::pow(lam, j) * t + phase[j]);
        }
        return a * s;
      };
      auto du = [a, lam, g, m, phase](Scalar t) {
        Scalar s = 0;
        for (int j = 0; j < m; ++j) {
          s += std::pow(lam, -j * g) * std::cos(std::pow(lam, j) * t + phase[j]);
        }
        return a * s;
      };
      return {u, du};
    }
    default:
      throw BadSpec("not a graph shape");
  }
}

bool in_hole(const ZooSpec& spec, const Vec& t) {
  for (const auto& [c, rho] : spec.holes) {
    if ((t - c).norm() < rho) return true;
  }
  return false;
}

DiscreteSurface generate_graph(const ZooSpec& spec, Scalar z_offset,
                               Scalar normal_sign, std::uint64_t stream_base) {
  const int n = spec.n;
  if (n < 1 || n + 1 > kMaxAmbientDim) throw BadSpec("unsupported dimension");
  const HeightField h = make_height(spec);

  Index g = 1;
  if (n == 1) {
    g = spec.samples;
  } else {
    g = static_cast<Index>(std::ceil(std::pow(double(spec.samples), 1.0 / n)));
  }
  if (g < 2) throw BadSpec("too few samples");
  const Scalar cell = 1.0 / g;
  Index cells = 1;
  for (int k = 0; k < n; ++k) cells *= g;

  std::vector<Scalar> coords, nus, ws;
  coords.reserve(cells * (n + 1));
  Vec t(n);
  for (Index c = 0; c < cells; ++c) {
    auto eng = make_engine(spec.seed, stream_base + c);
    std::uniform_real_distribution<Scalar> jit(0.0, 1.0);
    Index rem = c;
    for (int k = 0; k < n; ++k) {
      const Index cidx = rem % g;
      rem /= g;
      t[k] = -0.5 + (cidx + jit(eng)) * cell;
    }
    if (!spec.holes.empty() && in_hole(spec, t)) continue;

    const Scalar z = z_offset + h.u(t[0]);
    const Scalar slope = h.du(t[0]);
    const Scalar len = std::sqrt(1 + slope * slope);
    for (int k = 0; k < n; ++k) coords.push_back(t[k]);
    coords.push_back(z);
    // normal = sign * (-du, 0, ..., 1) / |..|
    nus.push_back(normal_sign * (-slope) / len);
    for (int k = 1; k < n; ++k) nus.push_back(normal_sign * 0.0);
    nus.push_back(normal_sign * 1.0 / len);
    ws.push_back(len * std::pow(cell, n));
  }
  if (coords.empty()) throw BadSpec("holes removed every sample");

  const Index rows = static_cast<Index>(ws.size());
  PointMatrix pts(rows, n + 1), normals(rows, n + 1);
  Eigen::VectorXd w(rows);
  for (Index i = 0; i < rows; ++i) {
    for (int k = 0; k <= n; ++k) {
      pts(i, k) = coords[i * (n + 1) + k];
      normals(i, k) = nus[i * (n + 1) + k];
    }
    w[i] = ws[i];
  }

  if (!spec.holes.empty()) {
    // Re-normalize the quadrature onto the remainder: exact kept area for
    // disjoint holes inside the box (graph shapes with holes are flat).
    Scalar removed = 0;
    for (const auto& [c, rho] : spec.holes) removed += M_PI * rho * rho;
    const Scalar kept = 1.0 - removed;
    if (!(kept > 0)) throw BadSpec("holes exceed the parameter box");
    w *= kept / w.sum();
  }

  return DiscreteSurface::from_data(std::move(pts), std::move(normals),
                                    std::move(w));
}

DiscreteSurface generate_sphere(const ZooSpec& spec) {
  const Scalar R = spec.radius;
  if (!(R > 0)) throw BadSpec("sphere needs radius > 0");
  if (spec.n == 1) {
    const Index g = spec.samples;
    PointMatrix pts(g, 2), nus(g, 2);
    Eigen::VectorXd w(g);
    for (Index c = 0; c < g; ++c) {
      auto eng = make_engine(spec.seed, c);
      std::uniform_real_distribution<Scalar> jit(0.0, 1.0);
      const Scalar th = 2 * M_PI * (c + jit(eng)) / g;
      const Scalar cs = std::cos(th), sn = std::sin(th);
      pts(c, 0) = R * cs;
      pts(c, 1) = R * sn;
      nus(c, 0) = cs;
      nus(c, 1) = sn;
      w[c] = 2 * M_PI * R / g;
    }
    return DiscreteSurface::from_data(std::move(pts), std::move(nus), std::move(w));
  }
  if (spec.n != 2) throw BadSpec("sphere supports n = 1 (circle) or n = 2");
  const Index g = static_cast<Index>(std::ceil(std::sqrt(double(spec.samples))));
  const Index cells = g * g;
  PointMatrix pts(cells, 3), nus(cells, 3);
  Eigen::VectorXd w(cells);
  for (Index c = 0; c < cells; ++c) {
    auto eng = make_engine(spec.seed, c);
    std::uniform_real_distribution<Scalar> jit(0.0, 1.0);
    const Index iu = c % g, iv = c / g;
    const Scalar u = (iu + jit(eng)) / g;
    const Scalar v = (iv + jit(eng)) / g;
    const Scalar z = 1 - 2 * u;                    // area-preserving band
    const Scalar rho = std::sqrt(std::max(0.0, 1 - z * z));
    const Scalar phi = 2 * M_PI * v;
    Vec nu(3);
    nu << rho * std::cos(phi), rho * std::sin(phi), z;
    pts.row(c) = (R * nu).transpose();
    nus.row(c) = nu.transpose();
    w[c] = 4 * M_PI * R * R / cells;
  }
  return DiscreteSurface::from_data(std::move(pts), std::move(nus), std::move(w));
}

DiscreteSurface generate_two_sheet(const ZooSpec& spec) {
  ZooSpec half = spec;
  half.shape = ZooShape::kPlane;
  half.samples = std::max<Index>(2, spec.samples / 2);
  const DiscreteSurface top = generate_graph(half, spec.sheet_gap, 1.0, 0);
  const DiscreteSurface bot =
      generate_graph(half, -spec.sheet_gap, -1.0, Index(1) << 40);

  const Index nt = top.size(), nb = bot.size();
  PointMatrix pts(nt + nb, top.ambient_dim()), nus(nt + nb, top.ambient_dim());
  Eigen::VectorXd w(nt + nb);
  pts << top.points(), bot.points();
  nus << top.normals(), bot.normals();
  w << top.weights(), bot.weights();
  return DiscreteSurface::from_data(std::move(pts), std::move(nus), std::move(w));
}

}  // namespace

DiscreteSurface generate(const ZooSpec& spec) {
  if (spec.samples < 2) throw BadSpec("need at least 2 samples");
  switch (spec.shape) {
    case ZooShape::kSphere:
      return generate_sphere(spec);
    case ZooShape::kTwoSheet:
      return generate_two_sheet(spec);
    case ZooShape::kHoledPlane: {
      ZooSpec s = spec;
      if (s.holes.empty()) {
        Vec c = Vec::Zero(s.n);
        s.holes.emplace_back(c, 0.1);
      }
      return generate_graph(s, 0.0, 1.0, 0);
    }
    default:
      return generate_graph(spec, 0.0, 1.0, 0);
  }
}

ZooExpectations describe(const ZooSpec& spec) {
  ZooExpectations e;
  const Scalar box_area = 1.0;  // unit parameter box, flat graphs
  switch (spec.shape) {
    case ZooShape::kPlane:
      e.carleson = ZooExpectations::Carleson::kZero;
      e.connected = true;
      e.kappa_hint = 1.0;
      e.alpha_scaling_exponent = std::numeric_limits<Scalar>::quiet_NaN();
      e.analytic_total_area = box_area;
      break;
    case ZooShape::kHoledPlane: {
      Scalar removed = 0;
      for (const auto& [c, rho] : spec.holes) removed += M_PI * rho * rho;
      if (spec.holes.empty()) removed = M_PI * 0.01;
      e.carleson = ZooExpectations::Carleson::kZero;
      e.connected = true;
      e.kappa_hint = M_PI / 2;  // worst detour hugs a hole
      e.alpha_scaling_exponent = std::numeric_limits<Scalar>::quiet_NaN();
      e.analytic_total_area = box_area - removed;
      break;
    }
    case ZooShape::kSphere:
      e.carleson = ZooExpectations::Carleson::kFinite;
      e.connected = true;
      e.kappa_hint = M_PI / 2;
      e.alpha_scaling_exponent = 1.0;
      e.analytic_total_area = spec.n == 1 ? 2 * M_PI * spec.radius
                                          : 4 * M_PI * spec.radius * spec.radius;
      break;
    case ZooShape::kGraphSin:
    case ZooShape::kGraphMultiscale:
      e.carleson = ZooExpectations::Carleson::kFinite;
      e.connected = true;
      e.kappa_hint = 1.0;
      e.alpha_scaling_exponent = 1.0;
      e.analytic_total_area = 0;  // no closed form; tests use quadrature
      break;
    case ZooShape::kSnowflakeLike:
      e.carleson = spec.gamma > 0 ? ZooExpectations::Carleson::kFinite
                                  : ZooExpectations::Carleson::kGrowing;
      e.connected = true;
      e.kappa_hint = 1.0;
      e.alpha_scaling_exponent = spec.gamma;
      e.analytic_total_area = 0;
      break;
    case ZooShape::kTwoSheet:
      e.carleson = ZooExpectations::Carleson::kGrowing;  // alpha ~ 1 at spanning scales
      e.connected = false;
      e.kappa_hint = std::numeric_limits<Scalar>::infinity();
      e.alpha_scaling_exponent = 0.0;
      e.analytic_total_area = 2 * box_area;
      break;
  }
  return e;
}

}  // namespace rlab
