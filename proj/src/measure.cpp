#include "rlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/errors.hpp"
#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"

namespace rlab {

Scalar mu_ball(const DiscreteSurface& s, const Ball& b) {
  Scalar sum = 0;
  s.index().for_each_in_ball(b, [&](Index i) { sum += s.weight(i); });
  return sum;
}

Scalar average(const DiscreteSurface& s, std::span<const Scalar> f, const Vec& x,
               Scalar r) {
  Scalar mass = 0, acc = 0;
  s.index().for_each_in_ball({x, r}, [&](Index i) {
    mass += s.weight(i);
    acc += s.weight(i) * f[i];
  });
  if (!(mass > 0)) throw EmptyBall("average over empty ball");
  return acc / mass;
}

Vec average_normal(const DiscreteSurface& s, const Vec& x, Scalar r) {
  if (!s.has_normals()) throw MissingNormals("average_normal needs normals");
  Scalar mass = 0;
  Vec acc = Vec::Zero(s.ambient_dim());
  s.index().for_each_in_ball({x, r}, [&](Index i) {
    mass += s.weight(i);
    acc += s.weight(i) * s.normal(i);
  });
  if (!(mass > 0)) throw EmptyBall("average_normal over empty ball");
  return acc / mass;
}

Vec center_of_mass(const DiscreteSurface& s, const Vec& x, Scalar r) {
  Scalar mass = 0;
  Vec acc = Vec::Zero(s.ambient_dim());
  s.index().for_each_in_ball({x, r}, [&](Index i) {
    mass += s.weight(i);
    acc += s.weight(i) * s.point(i);
  });
  if (!(mass > 0)) throw EmptyBall("center_of_mass over empty ball");
  return acc / mass;
}

AhlforsAudit ahlfors_audit(const DiscreteSurface& s,
                           const std::vector<Scalar>& radii, int probe_count,
                           std::uint64_t seed,
                           const std::optional<Ball>& probe_region) {
  AhlforsAudit out;
  out.h_min = s.h_min();
  const int n = s.dim_n();

  std::vector<Index> pool;
  if (probe_region) {
    s.index().range_query(*probe_region, pool);
  } else {
    pool.resize(s.size());
    for (Index i = 0; i < s.size(); ++i) pool[i] = i;
  }
  if (pool.empty()) return out;

  std::vector<Index> probes(probe_count);
  for (int p = 0; p < probe_count; ++p) {
    probes[p] = pool[splitmix64(seed ^ splitmix64(p)) % pool.size()];
  }

  std::vector<Scalar> usable;
  for (Scalar r : radii) {
    if (r < out.h_min) {
      ++out.skipped_radii;
    } else {
      usable.push_back(r);
    }
  }

  out.records.resize(probes.size() * usable.size());
  parallel_for(static_cast<Index>(probes.size()), [&](Index p) {
    const Vec x = s.point(probes[p]);
    for (size_t k = 0; k < usable.size(); ++k) {
      const Scalar r = usable[k];
      const Scalar mass = mu_ball(s, {x, r});
      AhlforsRecord& rec = out.records[p * usable.size() + k];
      rec.probe = probes[p];
      rec.r = r;
      rec.ratio = mass / std::pow(r, n);
      rec.flagged = !(mass > 0);
    }
  });

  bool first = true;
  for (const auto& rec : out.records) {
    if (rec.flagged) {
      ++out.flagged;
      continue;
    }
    if (first) {
      out.ratio_min = out.ratio_max = rec.ratio;
      first = false;
    } else {
      out.ratio_min = std::min(out.ratio_min, rec.ratio);
      out.ratio_max = std::max(out.ratio_max, rec.ratio);
    }
  }
  if (!first && out.ratio_min > 0) {
    out.c_m = std::max({Scalar(1), out.ratio_max, 1 / out.ratio_min});
  } else {
    out.c_m = std::numeric_limits<Scalar>::infinity();
  }
  return out;
}

}  // namespace rlab
