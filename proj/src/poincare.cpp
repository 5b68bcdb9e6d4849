#include "rlab/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/errors.hpp"
#include "rlab/measure.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"

namespace rlab {

TestFunction TestFunction::linear(Vec a, Scalar offset) {
  const Scalar lip = a.norm();
  return TestFunction(
      "linear", lip,
      [a, offset](const Vec& y) { return y.dot(a) + offset; },
      [a](const Vec&) { return a; });
}

TestFunction TestFunction::dist_to_point(Vec p) {
  return TestFunction(
      "dist-to-point", 1.0,
      [p](const Vec& y) { return (y - p).norm(); },
      [p](const Vec& y) -> Vec {
        const Vec d = y - p;
        const Scalar len = d.norm();
        if (len < 1e-300) return Vec::Zero(y.size());
        return d / len;
      });
}

TestFunction TestFunction::bump(Vec center, Scalar height, Scalar width) {
  // height * exp(-|y-c|^2 / (2 w^2)); |grad| peaks at |y-c| = w.
  const Scalar lip = std::abs(height) / width * std::exp(-0.5);
  return TestFunction(
      "bump", lip,
      [center, height, width](const Vec& y) {
        return height * std::exp(-(y - center).squaredNorm() / (2 * width * width));
      },
      [center, height, width](const Vec& y) -> Vec {
        const Vec d = y - center;
        const Scalar v =
            height * std::exp(-d.squaredNorm() / (2 * width * width));
        return (-v / (width * width)) * d;
      });
}

TestFunction TestFunction::trig(std::vector<Vec> freq, std::vector<Scalar> amp,
                                std::vector<Scalar> phase) {
  Scalar lip = 0;
  for (size_t m = 0; m < freq.size(); ++m) lip += std::abs(amp[m]) * freq[m].norm();
  return TestFunction(
      "trig", lip,
      [freq, amp, phase](const Vec& y) {
        Scalar v = 0;
        for (size_t m = 0; m < freq.size(); ++m) {
          v += amp[m] * std::sin(y.dot(freq[m]) + phase[m]);
        }
        return v;
      },
      [freq, amp, phase](const Vec& y) -> Vec {
        Vec g = Vec::Zero(y.size());
        for (size_t m = 0; m < freq.size(); ++m) {
          g += amp[m] * std::cos(y.dot(freq[m]) + phase[m]) * freq[m];
        }
        return g;
      });
}

TestFunction TestFunction::random_trig(int dim, Scalar max_freq,
                                       std::uint64_t seed) {
  auto eng = make_engine(seed, 0xf7);
  std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  const int modes = 1 + static_cast<int>(uni(eng) * 5) % 5;
  std::vector<Vec> freq;
  std::vector<Scalar> amp, phase;
  for (int m = 0; m < modes; ++m) {
    Vec k(dim);
    for (int c = 0; c < dim; ++c) k[c] = gauss(eng);
    k *= max_freq * uni(eng) / std::max(k.norm(), Scalar(1e-12));
    freq.push_back(k);
    amp.push_back(2 * uni(eng) - 1);
    phase.push_back(2 * M_PI * uni(eng));
  }
  return trig(std::move(freq), std::move(amp), std::move(phase));
}

Vec tangential_gradient(const DiscreteSurface& s, const TestFunction& f,
                        Index y_index) {
  if (!s.has_normals()) throw MissingNormals("tangential gradient needs normals");
  const Vec nu = s.normal(y_index);
  const Vec g = f.gradient(s.point(y_index));
  return g - g.dot(nu) * nu;
}

Scalar mcshane_extend(const PointMatrix& a_points,
                      const Eigen::VectorXd& a_values, const Vec& y, Scalar l) {
  const Index m = a_points.rows();
  if (m == 0) throw BadInput("mcshane extension needs a nonempty subset");
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const Scalar gap = std::abs(a_values[i] - a_values[j]);
      const Scalar reach = l * (a_points.row(i) - a_points.row(j)).norm();
      if (gap > reach * (1 + 1e-12) + 1e-15) {
        throw NotLipschitz("values on the subset exceed the stated constant",
                           i, j);
      }
    }
  }
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < m; ++i) {
    best = std::min(best,
                    a_values[i] + l * (y - a_points.row(i).transpose()).norm());
  }
  return best;
}

LipProfile lip_local(const DiscreteSurface& s, std::span<const Scalar> f_values,
                     Index x_index, const std::vector<Scalar>& radii) {
  std::vector<Scalar> sorted(radii);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  LipProfile out;
  const Vec x = s.point(x_index);
  const Scalar fx = f_values[x_index];
  bool any = false;
  for (Scalar r : sorted) {
    Scalar sup = 0;
    bool found = false;
    s.index().for_each_in_ball({x, r}, [&](Index i) {
      if (i == x_index) return;
      const Scalar d = (s.point(i) - x).norm();
      if (!(d > 0)) return;
      sup = std::max(sup, std::abs(f_values[i] - fx) / d);
      found = true;
    });
    if (!found) break;  // radii shrink; smaller ones are empty too
    out.radii.push_back(r);
    out.sup.push_back(sup);
    out.value = sup;
    any = true;
  }
  if (!any) throw NoNeighbors("no sample neighbors at any requested radius");
  return out;
}

PoincareReport poincare_audit(const DiscreteSurface& s,
                              const std::vector<TestFunction>& functions,
                              const std::vector<Index>& probes,
                              const std::vector<Scalar>& radii) {
  PoincareReport rep;
  const Index n = s.size();

  for (size_t fi = 0; fi < functions.size(); ++fi) {
    const TestFunction& f = functions[fi];
    // Per-point values and squared tangential gradients, shared by all probes.
    std::vector<Scalar> fv(n), g2(n);
    parallel_for(n, [&](Index i) {
      fv[i] = f.value(s.point(i));
      g2[i] = tangential_gradient(s, f, i).squaredNorm();
    });

    for (Index p : probes) {
      const Vec x = s.point(p);
      for (Scalar r : radii) {
        PoincareRecord rec;
        rec.function = static_cast<int>(fi);
        rec.probe = p;
        rec.r = r;

        const Scalar mean = average(s, fv, x, r);
        Scalar mass = 0, osc = 0;
        s.index().for_each_in_ball({x, r}, [&](Index i) {
          mass += s.weight(i);
          osc += s.weight(i) * std::abs(fv[i] - mean);
        });
        rec.lhs = osc / mass;

        Scalar mass2 = 0, grad2 = 0;
        s.index().for_each_in_ball({x, 2 * r}, [&](Index i) {
          mass2 += s.weight(i);
          grad2 += s.weight(i) * g2[i];
        });
        rec.rhs_core = r * std::sqrt(grad2 / mass2);

        const Scalar scale = f.lipschitz_bound() * r + std::abs(mean);
        if (rec.rhs_core > 1e-12 * std::max(scale, Scalar(1e-12))) {
          rec.ratio = rec.lhs / rec.rhs_core;
          if (rec.ratio > rep.c_p) {
            rep.c_p = rec.ratio;
            rep.worst = rec;
          }
        } else if (rec.lhs > 1e-9 * std::max(scale, Scalar(1e-12))) {
          rec.hard_failure = true;
          ++rep.hard_failures;
          rep.worst = rec;
        } else {
          ++rep.skipped_degenerate;
        }
        rep.records.push_back(rec);
      }
    }
  }
  return rep;
}

KeithReport keith_form_audit(const DiscreteSurface& s,
                             std::span<const Scalar> f_values,
                             const std::vector<Ball>& balls, Scalar kappa1,
                             Scalar slack) {
  KeithReport rep;
  rep.kappa1 = kappa1;
  rep.slack = slack;
  const Scalar h = s.h_min();
  const std::vector<Scalar> lip_radii{8 * h, 4 * h, 2 * h};

  for (const Ball& b : balls) {
    KeithRecord rec;
    rec.r = b.radius;

    const Scalar mean = average(s, f_values, b.center, b.radius);
    Scalar mass = 0, osc = 0;
    s.index().for_each_in_ball(b, [&](Index i) {
      mass += s.weight(i);
      osc += s.weight(i) * std::abs(f_values[i] - mean);
    });
    rec.lhs = osc / mass;

    std::vector<Index> idx2;
    s.index().range_query({b.center, 2 * b.radius}, idx2);
    std::vector<Scalar> lip2(idx2.size());
    parallel_for(static_cast<Index>(idx2.size()), [&](Index k) {
      try {
        lip2[k] = lip_local(s, f_values, idx2[k], lip_radii).value;
      } catch (const NoNeighbors&) {
        lip2[k] = 0;
      }
    });
    Scalar mass2 = 0, acc = 0;
    for (size_t k = 0; k < idx2.size(); ++k) {
      mass2 += s.weight(idx2[k]);
      acc += s.weight(idx2[k]) * lip2[k] * lip2[k];
    }
    rec.rhs = 2 * b.radius * std::sqrt(acc / mass2);

    if (rec.rhs > 1e-15) {
      rec.ratio = rec.lhs / rec.rhs;
    } else {
      rec.ratio = rec.lhs > 1e-12 ? std::numeric_limits<Scalar>::infinity() : 0;
    }
    rec.violation = rec.ratio > kappa1 * (1 + slack);
    if (rec.violation) ++rep.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, rec.ratio);
    rep.records.push_back(rec);
  }
  return rep;
}

}  // namespace rlab
