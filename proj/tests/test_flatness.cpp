#include <doctest.h>

#include "oracles.hpp"
#include "rlab/errors.hpp"
#include "rlab/flatness.hpp"
#include "rlab/measure.hpp"
#include "rlab/rng.hpp"
#include "rlab/zoo.hpp"

using namespace rlab;

namespace {

DiscreteSurface make(ZooShape shape, int n, Index samples,
                     Scalar amplitude = 0.02, std::uint64_t seed = 1) {
  ZooSpec spec;
  spec.shape = shape;
  spec.n = n;
  spec.samples = samples;
  spec.seed = seed;
  spec.amplitude = amplitude;
  return generate(spec);
}

Vec v3(Scalar a, Scalar b, Scalar c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("alpha vanishes on the plane and is 1 for cancelling normals") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  Vec origin = Vec::Zero(3);
  CHECK(alpha(plane, origin, 0.2) == doctest::Approx(0.0).epsilon(1e-12));

  ZooSpec two;
  two.shape = ZooShape::kTwoSheet;
  two.n = 2;
  two.samples = 20000;
  two.sheet_gap = 0.01;
  const auto sheets = generate(two);
  // equal-mass opposite normals: mean 0, every deviation 1
  CHECK(alpha(sheets, origin, 0.3) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("alpha on the unit sphere matches the cap quadrature oracle") {
  ZooSpec sph;
  sph.shape = ZooShape::kSphere;
  sph.n = 2;
  sph.samples = 200000;
  const auto s = generate(sph);
  auto eng = make_engine(17);
  for (Scalar r : {0.1, 0.2}) {
    const Scalar want = oracle::sphere_cap_quadrature(1.0, r).alpha;
    // probe-averaged to suppress sampling noise
    Scalar acc = 0;
    const int probes = 64;
    for (int p = 0; p < probes; ++p) {
      const Index i = static_cast<Index>(splitmix64(99 + p) % s.size());
      acc += alpha(s, s.point(i), r);
    }
    CHECK(acc / probes == doctest::Approx(want).epsilon(0.02));
    CHECK(std::abs(acc / probes - want) < 1e-3);
  }
  (void)eng;
}

TEST_CASE("pythagorean identity: alpha^2 + |nu_bar|^2 = 1 for unit normals") {
  const auto s = make(ZooShape::kGraphSin, 2, 30000, 0.05);
  auto check_at = [&](const Vec& x, Scalar r) {
    const Scalar a = alpha(s, x, r);
    const Scalar nu = average_normal(s, x, r).norm();
    CHECK(a * a + nu * nu == doctest::Approx(1.0).epsilon(1e-9));
  };
  check_at(Vec::Zero(3), 0.2);
  check_at(v3(0.1, -0.2, 0), 0.15);
  check_at(v3(-0.3, 0.1, 0), 0.1);
}

TEST_CASE("alpha is invariant under global rotation") {
  const auto s = make(ZooShape::kGraphSin, 2, 20000, 0.05);
  auto eng = make_engine(23);
  std::normal_distribution<Scalar> g(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = g(eng);
  }
  const Eigen::Matrix3d rot = Eigen::HouseholderQR<Eigen::Matrix3d>(m)
                                  .householderQ();
  PointMatrix pts = s.points() * rot.transpose();
  PointMatrix nus = s.normals() * rot.transpose();
  for (Index i = 0; i < nus.rows(); ++i) nus.row(i).normalize();
  const auto sr = DiscreteSurface::from_data(pts, nus, s.weights());

  const Vec x = v3(0.05, 0.1, 0);
  const Vec xr = rot * x;
  for (Scalar r : {0.1, 0.25}) {
    CHECK(alpha(sr, xr, r) == doctest::Approx(alpha(s, x, r)).epsilon(1e-9));
  }
}

TEST_CASE("flatness statistics are translation and scale invariant") {
  const auto s = make(ZooShape::kGraphSin, 1, 4000, 0.03);
  const Scalar lam = 3.7;
  Vec t(2);
  t << 1.25, -0.75;
  PointMatrix pts = lam * s.points();
  for (Index i = 0; i < pts.rows(); ++i) pts.row(i) += t.transpose();
  // H^n mass scales by lambda^n (n = 1 here)
  const auto sl =
      DiscreteSurface::from_data(pts, s.normals(), lam * s.weights());

  Vec x(2);
  x << 0.1, s.point(0)[1] * 0 + 0.0;
  // use an actual sample point as the center
  x = s.point(123);
  const Vec xl = lam * x + t;
  const Scalar r = 0.08;

  CHECK(alpha(sl, xl, lam * r) == doctest::Approx(alpha(s, x, r)).epsilon(1e-9));
  const auto b1 = beta1(s, x, r);
  const auto b1l = beta1(sl, xl, lam * r);
  CHECK(b1l.value == doctest::Approx(b1.value).epsilon(1e-7));
  const auto bi = beta_inf(s, x, r);
  const auto bil = beta_inf(sl, xl, lam * r);
  CHECK(bil.value == doctest::Approx(bi.value).epsilon(1e-7));
}

TEST_CASE("beta1 on a plane sample is zero and recovers the plane") {
  const auto s = make(ZooShape::kPlane, 2, 20000);
  const auto b = beta1(s, Vec::Zero(3), 0.2);
  CHECK(b.value < 1e-10);
  CHECK(std::abs(b.plane.normal[2]) > 1 - 1e-6);  // angle to e_z below 1e-6-ish
}

TEST_CASE("beta1 with a single outlier matches (w h)/r^{n+1} and the grid oracle") {
  const auto base = make(ZooShape::kPlane, 2, 10000);
  const Scalar h = 0.002, w = 0.01, r = 0.25;
  PointMatrix pts(base.size() + 1, 3);
  pts.topRows(base.size()) = base.points();
  pts.bottomRows(1) << 0, 0, h;
  Eigen::VectorXd ws(base.size() + 1);
  ws.head(base.size()) = base.weights();
  ws[base.size()] = w;
  const auto s = DiscreteSurface::from_data(pts, {}, ws);

  const auto b = beta1(s, Vec::Zero(3), r);
  CHECK(b.value == doctest::Approx(w * h / std::pow(r, 3)).epsilon(0.02));

  const auto grid = oracle::beta_grid_search(s.points(), s.weights(),
                                             Vec::Zero(3), r, 2);
  CHECK(b.value <= grid.beta1 * 1.02);
  CHECK(b.value >= grid.beta1 * 0.5);
}

TEST_CASE("beta1 on a circle scales like r/R and matches the grid oracle") {
  ZooSpec spec;
  spec.shape = ZooShape::kSphere;  // n = 1: circle
  spec.n = 1;
  spec.samples = 60000;
  spec.radius = 1.0;
  const auto s = generate(spec);
  Vec x(2);
  x << 1.0, 0.0;
  for (Scalar r : {0.1, 0.2}) {
    const auto b = beta1(s, x, r);
    const auto grid =
        oracle::beta_grid_search(s.points(), s.weights(), x, r, 1, 4000);
    CHECK(b.value == doctest::Approx(grid.beta1).epsilon(0.05));
  }
  const Scalar v1 = beta1(s, x, 0.1).value;
  const Scalar v2 = beta1(s, x, 0.2).value;
  CHECK(v2 / v1 == doctest::Approx(2.0).epsilon(0.2));  // linear in r
}

TEST_CASE("beta1 never exceeds its PCA initialization") {
  const auto s = make(ZooShape::kGraphSin, 2, 20000, 0.08, 3);
  auto eng = make_engine(31);
  for (int t = 0; t < 5; ++t) {
    const Index i = static_cast<Index>(splitmix64(1234 + t) % s.size());
    const Vec x = s.point(i);
    const Scalar r = 0.15;
    std::vector<Index> in = s.index().range_query({x, r});
    if (in.size() < 10) continue;
    const auto b = beta1(s, x, r);
    // PCA plane via the grid oracle machinery: evaluate the returned plane
    // against a fresh gather; the optimizer result must be at least as good
    // as any candidate it tried, in particular the PCA start.
    const auto grid =
        oracle::beta_grid_search(s.points(), s.weights(), x, r, 2, 120);
    CHECK(b.value <= grid.beta1 * 1.05 + 1e-12);
  }
  (void)eng;
}

TEST_CASE("beta_inf: plane through x, twin sheets, sphere cap vs grid oracle") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  CHECK(beta_inf(plane, Vec::Zero(3), 0.2).value < 1e-10);

  ZooSpec two;
  two.shape = ZooShape::kTwoSheet;
  two.n = 2;
  two.samples = 20000;
  two.sheet_gap = 0.02;
  const auto sheets = generate(two);
  const Scalar r = 0.3;
  const auto b = beta_inf(sheets, Vec::Zero(3), r);
  CHECK(b.value == doctest::Approx(0.02 / r).epsilon(0.02));

  ZooSpec sph;
  sph.shape = ZooShape::kSphere;
  sph.n = 2;
  sph.samples = 100000;
  const auto sphere = generate(sph);
  const Vec pole = v3(0, 0, 1);
  const auto bs = beta_inf(sphere, pole, 0.2);
  const auto grid = oracle::beta_grid_search(sphere.points(), sphere.weights(),
                                             pole, 0.2, 2);
  CHECK(bs.value == doctest::Approx(grid.beta_inf).epsilon(0.05));
}

TEST_CASE("beta1 is controlled by the measured regularity times beta_inf") {
  // the averaged number never exceeds the measured mu(B_r)/r^n ceiling times
  // the sup number
  for (ZooShape shape : {ZooShape::kGraphSin, ZooShape::kSphere}) {
    const auto s = make(shape, 2, 40000, 0.05);
    const auto audit = ahlfors_audit(s, {0.05, 0.1, 0.2}, 32, 5);
    for (int t = 0; t < 4; ++t) {
      const Index i = static_cast<Index>(splitmix64(500 + t) % s.size());
      const Vec x = s.point(i);
      const Scalar r = 0.15;
      const Scalar b1 = beta1(s, x, r).value;
      const Scalar bi = beta_inf(s, x, r).value;
      CHECK(b1 <= 1.1 * audit.ratio_max * bi + 1e-12);
    }
  }
}

TEST_CASE("carleson dyadic sum: plane zero, sphere near the per-level oracle") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  ScaleLadder ladder{0.2, 3.0, 3};
  CHECK(carleson_dyadic_sum(plane, Vec::Zero(3), ladder).sum == 0);

  ZooSpec sph;
  sph.shape = ZooShape::kSphere;
  sph.n = 2;
  sph.samples = 200000;
  const auto sphere = generate(sph);
  ScaleLadder sl{0.5, 3.0, 2};
  const Vec pole = v3(0, 0, 1);
  Scalar want = 0;
  int used = 0;
  for (int j = 1; j <= sl.depth; ++j) {
    if (sl.r(j) < sphere.h_min()) continue;
    const Scalar a = oracle::sphere_cap_quadrature(1.0, sl.r(j)).alpha;
    want += a * a;
    ++used;
  }
  const auto got = carleson_dyadic_sum(sphere, pole, sl);
  CHECK(got.levels_used == used);
  CHECK(got.sum == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("carleson dyadic sum grows with depth on the lacunary graph") {
  ZooSpec snow;
  snow.shape = ZooShape::kSnowflakeLike;
  snow.n = 1;
  snow.samples = 60000;
  snow.amplitude = 2.5;
  snow.lambda = 4.0;
  snow.gamma = 0.0;
  snow.modes = 6;
  const auto s = generate(snow);
  const Vec x = s.point(s.index().nearest(Vec::Zero(2)).second);

  ScaleLadder ladder{1.0, 4.0, 4};
  std::vector<Scalar> increments;
  for (int j = 1; j <= 4; ++j) {
    const Scalar a = alpha(s, x, ladder.r(j));
    increments.push_back(a * a);
  }
  // self-similar slopes: every added level contributes on the order of the
  // first one
  for (size_t j = 1; j < increments.size(); ++j) {
    CHECK(increments[j] >= 0.5 * increments[0]);
  }
}

TEST_CASE("carleson integral: plane zero, two-sheet log divergence") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  CHECK(carleson_integral(plane, Vec::Zero(3), 0.3, 48) ==
        doctest::Approx(0.0).epsilon(1e-12));

  ZooSpec two;
  two.shape = ZooShape::kTwoSheet;
  two.n = 2;
  two.samples = 20000;
  two.sheet_gap = 0.004;  // below the resolution floor: every ball spans
  const auto sheets = generate(two);
  const Scalar r_max = 0.45;
  const Scalar got = carleson_integral(sheets, Vec::Zero(3), r_max, 64);
  const Scalar want = std::log(r_max / sheets.h_min());
  CHECK(got == doctest::Approx(want).epsilon(0.25));
}

TEST_CASE("dyadic equivalence: plane degenerates, sphere in the measured band") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  std::vector<Index> probes{0, 500, 1000};
  // interior probes
  probes = plane.index().range_query({Vec::Zero(3), 0.05});
  probes.resize(3);
  const auto prep = check_dyadic_equivalence(plane, probes, ScaleLadder{});
  for (const auto& rec : prep.records) {
    CHECK(rec.degenerate);
    CHECK(rec.ratio == 1);
  }

  ZooSpec sph;
  sph.shape = ZooShape::kSphere;
  sph.n = 2;
  sph.samples = 200000;
  const auto sphere = generate(sph);
  std::vector<Index> sp;
  for (int t = 0; t < 6; ++t) {
    sp.push_back(static_cast<Index>(splitmix64(2000 + t) % sphere.size()));
  }
  const auto rep = check_dyadic_equivalence(sphere, sp, ScaleLadder{});
  CHECK(rep.min_ratio >= 0.2);
  CHECK(rep.max_ratio <= 5.0);
}

TEST_CASE("normal lower bound: plane and sphere in regime, sheets out") {
  const auto plane = make(ZooShape::kPlane, 2, 20000);
  std::vector<Index> probes = plane.index().range_query({Vec::Zero(3), 0.05});
  probes.resize(4);
  const auto prep =
      check_normal_lower_bound(plane, probes, {0.1, 0.2}, 0.01, 32);
  CHECK(prep.in_regime);
  CHECK(prep.violations.empty());
  for (const auto& rec : prep.records) CHECK(rec.nu_norm == doctest::Approx(1.0));

  ZooSpec sph;
  sph.shape = ZooShape::kSphere;
  sph.n = 2;
  sph.samples = 100000;
  const auto sphere = generate(sph);
  std::vector<Index> sp{0, 777, 4321};
  const auto srep =
      check_normal_lower_bound(sphere, sp, {0.1, 0.3}, 0.01, 32);
  for (const auto& rec : srep.records) CHECK(rec.nu_norm >= 0.9);

  ZooSpec two;
  two.shape = ZooShape::kTwoSheet;
  two.n = 2;
  two.samples = 20000;
  two.sheet_gap = 0.004;
  const auto sheets = generate(two);
  std::vector<Index> tp{0, 100};
  const auto trep =
      check_normal_lower_bound(sheets, tp, {0.2, 0.4}, 0.01, 32);
  CHECK_FALSE(trep.in_regime);  // large oscillation integral: no contradiction
  CHECK(trep.violations.size() == trep.records.size());
  for (const auto& rec : trep.records) CHECK(rec.nu_norm < 0.1);
}

TEST_CASE("empty balls and missing normals raise typed errors") {
  const auto plane = make(ZooShape::kPlane, 2, 1000);
  CHECK_THROWS_AS(alpha(plane, v3(9, 9, 9), 0.01), EmptyBall);
  CHECK_THROWS_AS(beta1(plane, v3(9, 9, 9), 0.01), EmptyBall);

  const auto nless = DiscreteSurface::from_data(plane.points(), {},
                                                plane.weights());
  CHECK_THROWS_AS(alpha(nless, Vec::Zero(3), 0.2), MissingNormals);
}
