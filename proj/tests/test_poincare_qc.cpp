#include <doctest.h>

#include "oracles.hpp"
#include "rlab/errors.hpp"
#include "rlab/measure.hpp"
#include "rlab/poincare.hpp"
#include "rlab/quasiconvex.hpp"
#include "rlab/rng.hpp"
#include "rlab/zoo.hpp"

using namespace rlab;

namespace {

DiscreteSurface make(ZooShape shape, int n, Index samples,
                     Scalar amplitude = 0.02) {
  ZooSpec spec;
  spec.shape = shape;
  spec.n = n;
  spec.samples = samples;
  spec.amplitude = amplitude;
  spec.wavelength = 0.05;
  return generate(spec);
}

Vec v3(Scalar a, Scalar b, Scalar c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

std::vector<Index> interior_probes(const DiscreteSurface& s, Scalar radius,
                                   int count, const Vec& center) {
  auto in = s.index().range_query({center, radius});
  std::vector<Index> probes;
  const size_t stride = std::max<size_t>(1, in.size() / count);
  for (size_t i = 0; i < in.size() && probes.size() < size_t(count); i += stride) {
    probes.push_back(in[i]);
  }
  return probes;
}

}  // namespace

TEST_CASE("tangential gradient kills the normal component exactly") {
  const auto s = make(ZooShape::kGraphSin, 2, 20000, 0.05);
  for (int t = 0; t < 20; ++t) {
    const Index i = static_cast<Index>(splitmix64(800 + t) % s.size());
    const Vec nu = s.normal(i);

    // f = <., nu(y)>: the gradient is all normal
    CHECK(tangential_gradient(s, TestFunction::linear(nu), i).norm() < 1e-12);

    // f = <., t> with t tangent: untouched
    const auto frame = orthonormal_complement(nu);
    const Vec tan = frame.col(0);
    CHECK((tangential_gradient(s, TestFunction::linear(tan), i) - tan).norm() <
          1e-12);

    // general direction: the projection formula, orthogonal to nu
    Vec e(3);
    e << 0.3, -0.8, 0.5;
    const Vec g = tangential_gradient(s, TestFunction::linear(e), i);
    CHECK((g - (e - e.dot(nu) * nu)).norm() < 1e-12);
    CHECK(std::abs(g.dot(nu)) < 1e-12);
  }
}

TEST_CASE("the averaged-normal test function obeys its pointwise bound") {
  // f = <., nu_bar>: |grad^M f| <= 2 |nu_bar - nu(y)| at every sample point
  const auto s = make(ZooShape::kSphere, 2, 50000);
  const Vec x = v3(0, 0, 1);
  const Scalar r = 0.2;
  const Vec nubar = average_normal(s, x, 2 * r);
  const auto f = TestFunction::linear(nubar);
  s.index().for_each_in_ball({x, r}, [&](Index i) {
    const Scalar lhs = tangential_gradient(s, f, i).norm();
    CHECK(lhs <= 2 * (nubar - s.normal(i)).norm() + 1e-12);
  });
}

TEST_CASE("inf-convolution extension: membership, constants, two-point form") {
  PointMatrix a(2, 2);
  a << 0, 0, 1, 0;
  Eigen::VectorXd fa(2);
  const Scalar l = 2.0, d = 1.0;
  fa << 0, d * l;

  SUBCASE("two-point closed form") {
    // fbar(y) = min(L |y - a1|, d L + L |y - a2|)
    auto eng = make_engine(77);
    std::uniform_real_distribution<Scalar> uni(-2.0, 3.0);
    for (int t = 0; t < 200; ++t) {
      Vec y(2);
      y << uni(eng), uni(eng);
      const Scalar want =
          std::min(l * (y - a.row(0).transpose()).norm(),
                   d * l + l * (y - a.row(1).transpose()).norm());
      CHECK(std::abs(mcshane_extend(a, fa, y, l) - want) <= 1e-9);
    }
  }
  SUBCASE("values on the subset are reproduced") {
    CHECK(mcshane_extend(a, fa, a.row(0).transpose(), l) == doctest::Approx(0));
    CHECK(mcshane_extend(a, fa, a.row(1).transpose(), l) ==
          doctest::Approx(d * l));
  }
  SUBCASE("constants extend to constants at their own Lipschitz constant") {
    Eigen::VectorXd c(2);
    c << 3, 3;
    Vec y(2);
    y << -5, 7;
    CHECK(mcshane_extend(a, c, y, 0.0) == doctest::Approx(3.0));
  }
  SUBCASE("non-Lipschitz data is rejected with a witness") {
    Eigen::VectorXd bad(2);
    bad << 0, 10;  // slope 10 > L = 2
    Vec y(2);
    y << 0.5, 0;
    CHECK_THROWS_AS(mcshane_extend(a, bad, y, 2.0), NotLipschitz);
  }
  SUBCASE("the extension is L-Lipschitz on random pairs") {
    PointMatrix pts(5, 2);
    pts << 0, 0, 1, 0, 0, 1, 1, 1, 0.5, 0.5;
    Eigen::VectorXd v(5);
    v << 0, 1, 1, 0.5, 0.7;
    const Scalar lip = 1.5;
    auto eng = make_engine(78);
    std::uniform_real_distribution<Scalar> uni(-2.0, 2.0);
    for (int t = 0; t < 1000; ++t) {
      Vec y(2), z(2);
      y << uni(eng), uni(eng);
      z << uni(eng), uni(eng);
      const Scalar fy = mcshane_extend(pts, v, y, lip);
      const Scalar fz = mcshane_extend(pts, v, z, lip);
      CHECK(std::abs(fy - fz) <= lip * (y - z).norm() + 1e-9);
    }
  }
}

TEST_CASE("local Lipschitz constant: linear, constant, and analytic gradients") {
  const auto s = make(ZooShape::kPlane, 2, 50000);
  const Scalar h = s.h_min();
  const std::vector<Scalar> radii{8 * h, 4 * h, 2 * h};

  // linear form with an in-plane direction component
  Vec a(3);
  a << 0.6, -0.8, 0;  // tangent to the plane z = 0
  std::vector<Scalar> fv(s.size());
  for (Index i = 0; i < s.size(); ++i) fv[i] = s.point(i).dot(a);
  const Index probe = s.index().nearest(Vec::Zero(3)).second;
  const auto prof = lip_local(s, fv, probe, radii);
  CHECK(prof.value == doctest::Approx(1.0).epsilon(0.02));
  CHECK(prof.radii.size() == 3);

  // constants have zero local slope
  std::vector<Scalar> cv(s.size(), 2.0);
  CHECK(lip_local(s, cv, probe, radii).value == 0);

  // distance to a far point: slope matches the tangential gradient closely
  const auto f = TestFunction::dist_to_point(v3(2, 1, 3));
  std::vector<Scalar> dv(s.size());
  for (Index i = 0; i < s.size(); ++i) dv[i] = f.value(s.point(i));
  const Scalar tg = tangential_gradient(s, f, probe).norm();
  CHECK(lip_local(s, dv, probe, radii).value ==
        doctest::Approx(tg).epsilon(0.05));

  // no neighbors at any radius
  CHECK_THROWS_AS(lip_local(s, fv, probe, {1e-9}), NoNeighbors);
}

TEST_CASE("the tangential gradient never beats the local slope by over 5%") {
  for (auto shape : {ZooShape::kSphere, ZooShape::kGraphSin}) {
    const auto s = make(shape, 2, 100000, 0.05);
    const Scalar h = s.h_min();
    const std::vector<Scalar> radii{8 * h, 4 * h, 2 * h};
    Vec a(3);
    a << 0.8, -0.5, 0.6;
    const auto f = TestFunction::linear(a);
    std::vector<Scalar> fv(s.size());
    for (Index i = 0; i < s.size(); ++i) fv[i] = f.value(s.point(i));
    int bad = 0;
    const int total = 1000;
    for (int t = 0; t < total; ++t) {
      const Index i = static_cast<Index>(splitmix64(7000 + t) % s.size());
      const Scalar tg = tangential_gradient(s, f, i).norm();
      if (tg > lip_local(s, fv, i, radii).value * 1.05) ++bad;
    }
    CHECK(bad <= total / 100);  // at least 99% comply
  }
}

TEST_CASE("tangent directions approach the sample at a superlinear rate") {
  // walking off a smooth surface along a tangent line, the gap to the sample
  // shrinks faster than the step
  const auto s = make(ZooShape::kSphere, 2, 100000);
  const Index i = s.index().nearest(v3(0, 0, 1)).second;
  const Vec x = s.point(i);
  const Vec tau = orthonormal_complement(s.normal(i)).col(0);
  // steps stay above the sampling floor so the shrinking gap is visible
  std::vector<Scalar> ratios;
  for (Scalar h : {0.8, 0.4, 0.2, 0.1}) {
    const Scalar gap = s.index().nearest(x + h * tau).first;
    ratios.push_back(gap / h);
  }
  for (size_t k = 1; k < ratios.size(); ++k) CHECK(ratios[k] < ratios[k - 1]);
  CHECK(ratios.back() <= 0.5 * ratios.front());
}

TEST_CASE("poincare audit: plane constant pinned, degenerate records skipped") {
  const auto s = make(ZooShape::kPlane, 2, 100000);
  std::vector<TestFunction> fns{
      TestFunction::linear(v3(1, 0.5, 0)),
      TestFunction::dist_to_point(v3(2, 1, 3)),
      TestFunction::bump(v3(0.05, -0.1, 0), 1.0, 0.2),
      TestFunction::random_trig(3, 8.0, 4),
  };
  const auto probes = interior_probes(s, 0.1, 8, Vec::Zero(3));
  const auto rep = poincare_audit(s, fns, probes, {0.05, 0.1, 0.2});
  CHECK(rep.hard_failures == 0);
  // classical-regime window, pinned as a regression band
  CHECK(rep.c_p > 0.3);
  CHECK(rep.c_p < 0.7);

  // constant functions only produce 0/0 records
  std::vector<TestFunction> constant{TestFunction::linear(Vec::Zero(3), 5.0)};
  const auto crep = poincare_audit(s, constant, probes, {0.1});
  CHECK(crep.skipped_degenerate == static_cast<int>(crep.records.size()));
  CHECK(crep.c_p == 0);
}

TEST_CASE("poincare constant is scale invariant on the plane") {
  const auto s = make(ZooShape::kPlane, 2, 50000);
  const Scalar lam = 2.0;
  PointMatrix pts = lam * s.points();
  const auto sl = DiscreteSurface::from_data(pts, s.normals(),
                                             lam * lam * s.weights());
  std::vector<TestFunction> fns{TestFunction::linear(v3(1, 0.5, 0)),
                                TestFunction::bump(v3(0.1, 0, 0), 1.0, 0.3)};
  std::vector<TestFunction> fns_scaled{
      TestFunction::linear(v3(1, 0.5, 0)),
      TestFunction::bump(lam * v3(0.1, 0, 0), 1.0, lam * 0.3)};
  const auto probes = interior_probes(s, 0.1, 6, Vec::Zero(3));
  const auto rep = poincare_audit(s, fns, probes, {0.06, 0.12});
  const auto repl = poincare_audit(sl, fns_scaled, probes, {lam * 0.06, lam * 0.12});
  CHECK(repl.c_p == doctest::Approx(rep.c_p).epsilon(0.01));
}

TEST_CASE("disjoint sheets defeat the inequality: a divergent witness record") {
  ZooSpec spec;
  spec.shape = ZooShape::kTwoSheet;
  spec.n = 2;
  spec.samples = 40000;
  spec.sheet_gap = 0.05;
  const auto s = generate(spec);
  // smooth sheet-sign function: sin(pi z / (2 gap)) is +-1 on the sheets with
  // a vanishing gradient there
  Vec k = Vec::Zero(3);
  k[2] = M_PI / (2 * spec.sheet_gap);
  std::vector<TestFunction> fns{TestFunction::trig({k}, {1.0}, {0.0})};
  const auto probes = interior_probes(s, 0.1, 4, v3(0, 0, spec.sheet_gap));
  const auto rep = poincare_audit(s, fns, probes, {0.3});
  CHECK(rep.hard_failures > 0);
  bool witnessed = false;
  for (const auto& rec : rep.records) {
    if (rec.lhs > 0.1 && rec.rhs_core < 1e-3) witnessed = true;
  }
  CHECK(witnessed);
}

TEST_CASE("metric-side inequality holds on the plane with the same constant") {
  const auto s = make(ZooShape::kPlane, 2, 50000);
  Vec a(3);
  a << 1, 0.5, 0;
  std::vector<Scalar> fv(s.size());
  for (Index i = 0; i < s.size(); ++i) fv[i] = s.point(i).dot(a);

  std::vector<TestFunction> fns{TestFunction::linear(a)};
  const auto probes = interior_probes(s, 0.1, 6, Vec::Zero(3));
  const auto prep = poincare_audit(s, fns, probes, {0.06, 0.12});

  std::vector<Ball> balls;
  for (Index p : probes) balls.push_back({s.point(p), 0.12});
  const auto krep = keith_form_audit(s, fv, balls, prep.c_p / 2);
  CHECK(krep.violations == 0);
  CHECK(krep.worst_ratio <= prep.c_p / 2 * 1.1);

  // constants trivially satisfy the inequality
  std::vector<Scalar> cv(s.size(), 1.0);
  const auto crep = keith_form_audit(s, cv, balls, prep.c_p / 2);
  CHECK(crep.violations == 0);
  CHECK(crep.worst_ratio == 0);
}

TEST_CASE("metric-side inequality fails across disjoint sheets") {
  ZooSpec spec;
  spec.shape = ZooShape::kTwoSheet;
  spec.n = 2;
  spec.samples = 40000;
  spec.sheet_gap = 0.05;
  const auto s = generate(spec);
  // locally constant sheet sign: flat on each sheet, oscillation across
  std::vector<Scalar> fv(s.size());
  for (Index i = 0; i < s.size(); ++i) fv[i] = s.points()(i, 2) > 0 ? 1.0 : -1.0;
  std::vector<Ball> balls{{v3(0, 0, 0.05), 0.3}};
  const auto rep = keith_form_audit(s, fv, balls, 0.25);
  CHECK(rep.violations == 1);
}

TEST_CASE("quasiconvexity: flat samples, spheres, sheets, and holes") {
  SUBCASE("plane is 1-quasiconvex up to graph slack") {
    const auto s = make(ZooShape::kPlane, 2, 100000);
    const auto rep = quasiconvexity_audit(s, 6 * s.median_nn_spacing(), 8, 11);
    CHECK(rep.connected);
    CHECK(rep.kappa >= 1 - 1e-9);
    CHECK(rep.kappa <= 1.02);
    // default radius: coarser graph, still near 1
    const auto rep3 = quasiconvexity_audit(s, 0, 4, 11);
    CHECK(rep3.kappa <= 1 + 3 * rep3.h / (10 * rep3.h));
  }
  SUBCASE("sphere: antipodal pairs give the great-circle ratio") {
    ZooSpec spec;
    spec.shape = ZooShape::kSphere;
    spec.n = 2;
    spec.samples = 100000;
    const auto s = generate(spec);
    const auto rep = quasiconvexity_audit(s, 6 * s.median_nn_spacing(), 6, 11);
    CHECK(rep.kappa == doctest::Approx(M_PI / 2).epsilon(0.05));
  }
  SUBCASE("two sheets disconnect") {
    ZooSpec spec;
    spec.shape = ZooShape::kTwoSheet;
    spec.n = 2;
    spec.samples = 20000;
    spec.sheet_gap = 0.05;
    const auto s = generate(spec);
    const auto rep = quasiconvexity_audit(s, 0, 4, 11);
    CHECK_FALSE(rep.connected);
    CHECK(rep.components == 2);
    CHECK(std::isinf(rep.kappa));
  }
  SUBCASE("a hole forces a bounded detour") {
    ZooSpec spec;
    spec.shape = ZooShape::kHoledPlane;
    spec.n = 2;
    spec.samples = 100000;
    Vec c = Vec::Zero(2);
    spec.holes.emplace_back(c, 0.1);
    const auto s = generate(spec);
    const auto rep = quasiconvexity_audit(s, 6 * s.median_nn_spacing(), 8, 11);
    CHECK(rep.connected);
    CHECK(rep.kappa >= 1 - 1e-9);
    CHECK(rep.kappa <= 1.6);
  }
}
