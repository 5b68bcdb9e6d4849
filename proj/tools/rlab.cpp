// rlab: multiscale flatness statistics, coherent ball-and-plane collections,
// plane-flow parametrization, and metric inequality audits over weighted point
// samples of hypersurfaces.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rlab/ccbp.hpp"
#include "rlab/errors.hpp"
#include "rlab/flatness.hpp"
#include "rlab/log.hpp"
#include "rlab/measure.hpp"
#include "rlab/parallel.hpp"
#include "rlab/parametrize.hpp"
#include "rlab/poincare.hpp"
#include "rlab/quasiconvex.hpp"
#include "rlab/rng.hpp"
#include "rlab/surface.hpp"
#include "rlab/zoo.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;
using namespace rlab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCompute = 3;
constexpr int kExitEpsilon = 4;
constexpr int kExitViolation = 5;

struct Options {
  std::string input;
  std::string shape;
  std::string out_dir = ".";
  std::string out_file;  // zoo generate only

  // ladder + region
  double r_base = 0.2;
  double ratio = 3.0;
  int depth = 3;
  std::vector<double> region_center;
  double region_radius = 0.35;

  double eps_target = 0.05;
  int probes = 16;
  std::uint64_t seed = 1;
  int threads = 0;

  // zoo parameters
  long samples = 100000;
  int dim = 2;
  double amplitude = 0.02;
  double wavelength = 0.05;
  double radius = 1.0;
  double lambda = 4.0;
  double gamma = 0.0;
  int modes = 6;
  double sheet_gap = 0.05;
  double hole_radius = 0.0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "input CSV sample (x0..xn[,nu0..nun][,w])");
  cmd->add_option("--shape", o.shape,
                  "zoo shape to generate in place of --input");
  cmd->add_option("--r-base", o.r_base, "base scale r_0");
  cmd->add_option("--ratio", o.ratio, "scale ratio per level");
  cmd->add_option("--depth", o.depth, "ladder depth J (scales r_0..r_J)");
  cmd->add_option("--region-center", o.region_center,
                  "analysis region center (comma separated)")
      ->delimiter(',');
  cmd->add_option("--region-radius", o.region_radius, "analysis region radius");
  cmd->add_option("--eps-target", o.eps_target, "compatibility target");
  cmd->add_option("--probes", o.probes, "probe count");
  cmd->add_option("--seed", o.seed, "deterministic seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = auto)");
  cmd->add_option("--out-dir", o.out_dir, "report directory");

  cmd->add_option("--samples", o.samples, "zoo sample count");
  cmd->add_option("--dim", o.dim, "zoo intrinsic dimension n");
  cmd->add_option("--amplitude", o.amplitude, "zoo amplitude a");
  cmd->add_option("--wavelength", o.wavelength, "zoo wavelength l");
  cmd->add_option("--radius", o.radius, "zoo sphere radius R");
  cmd->add_option("--lambda", o.lambda, "zoo lacunary frequency ratio");
  cmd->add_option("--gamma", o.gamma, "zoo lacunary slope decay");
  cmd->add_option("--modes", o.modes, "zoo lacunary mode count");
  cmd->add_option("--sheet-gap", o.sheet_gap, "zoo two-sheet half gap");
  cmd->add_option("--hole-radius", o.hole_radius, "zoo holed-plane hole radius");
}

ZooSpec zoo_spec_from(const Options& o) {
  ZooSpec spec;
  spec.shape = parse_shape(o.shape);
  spec.n = o.dim;
  spec.samples = o.samples;
  spec.seed = o.seed;
  spec.amplitude = o.amplitude;
  spec.wavelength = o.wavelength;
  spec.radius = o.radius;
  spec.lambda = o.lambda;
  spec.gamma = o.gamma;
  spec.modes = o.modes;
  spec.sheet_gap = o.sheet_gap;
  if (o.hole_radius > 0) {
    Vec c = Vec::Zero(spec.n);
    spec.holes.emplace_back(c, o.hole_radius);
  }
  return spec;
}

DiscreteSurface load_surface(const Options& o) {
  if (!o.input.empty()) {
    if (!std::filesystem::exists(o.input)) {
      throw BadInput("input file does not exist: " + o.input);
    }
    return DiscreteSurface::load_csv(o.input);
  }
  if (!o.shape.empty()) return generate(zoo_spec_from(o));
  throw BadInput("either --input or --shape is required");
}

Vec region_center_of(const Options& o, int ambient) {
  if (o.region_center.empty()) return Vec::Zero(ambient);
  if (static_cast<int>(o.region_center.size()) != ambient) {
    throw BadInput("--region-center needs " + std::to_string(ambient) +
                   " coordinates");
  }
  Vec c(ambient);
  for (int k = 0; k < ambient; ++k) c[k] = o.region_center[k];
  return c;
}

json config_echo(const Options& o) {
  json j;
  j["input"] = o.input;
  j["shape"] = o.shape;
  j["r_base"] = o.r_base;
  j["ratio"] = o.ratio;
  j["depth"] = o.depth;
  j["region_center"] = o.region_center;
  j["region_radius"] = o.region_radius;
  j["eps_target"] = o.eps_target;
  j["probes"] = o.probes;
  j["seed"] = o.seed;
  j["threads"] = o.threads;
  j["samples"] = o.samples;
  j["dim"] = o.dim;
  j["amplitude"] = o.amplitude;
  j["wavelength"] = o.wavelength;
  j["radius"] = o.radius;
  j["lambda"] = o.lambda;
  j["gamma"] = o.gamma;
  j["modes"] = o.modes;
  j["sheet_gap"] = o.sheet_gap;
  j["hole_radius"] = o.hole_radius;
  return j;
}

json report_envelope(const Options& o) {
  json j;
  j["version"] = kVersion;
  j["seed"] = o.seed;
  j["config"] = config_echo(o);
  return j;
}

void write_json(const Options& o, const std::string& name, const json& j) {
  const auto path = std::filesystem::path(o.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw BadInput("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<Index> draw_probes(const DiscreteSurface& s, const Vec& center,
                               Scalar radius, int count, std::uint64_t seed) {
  auto pool = s.index().range_query({center, radius});
  if (pool.empty()) throw BadInput("analysis region contains no sample points");
  std::vector<Index> probes;
  for (int t = 0; t < count; ++t) {
    probes.push_back(pool[splitmix64(seed ^ splitmix64(t)) % pool.size()]);
  }
  return probes;
}

std::vector<Scalar> resolvable_ladder_radii(const DiscreteSurface& s,
                                            const ScaleLadder& ladder) {
  std::vector<Scalar> radii;
  for (int j = 0; j <= ladder.depth; ++j) {
    if (ladder.r(j) >= s.h_min()) radii.push_back(ladder.r(j));
  }
  if (radii.empty()) {
    throw ResolutionExceeded("every ladder scale is below the resolution " +
                             std::to_string(s.h_min()));
  }
  return radii;
}

int cmd_generate(const Options& o) {
  if (o.shape.empty()) throw BadInput("zoo generate requires --shape");
  if (o.out_file.empty()) throw BadInput("zoo generate requires --out");
  const auto s = generate(zoo_spec_from(o));
  s.save_csv(o.out_file);
  std::cout << "wrote " << s.size() << " samples to " << o.out_file << "\n";
  return kExitOk;
}

int cmd_analyze(const Options& o) {
  const auto s = load_surface(o);
  const ScaleLadder ladder{o.r_base, o.ratio, o.depth};
  const Vec center = region_center_of(o, s.ambient_dim());
  const auto radii = resolvable_ladder_radii(s, ladder);
  const auto probes = draw_probes(s, center, o.region_radius, o.probes, o.seed);

  // ahlfors.json
  const auto audit = ahlfors_audit(s, radii, o.probes, o.seed,
                                   Ball{center, o.region_radius});
  {
    json j = report_envelope(o);
    j["h_min"] = s.h_min();
    j["ratio_min"] = audit.ratio_min;
    j["ratio_max"] = audit.ratio_max;
    j["c_m"] = audit.c_m;
    j["skipped_radii"] = audit.skipped_radii;
    j["flagged"] = audit.flagged;
    j["records"] = audit.records.size();
    write_json(o, "ahlfors.json", j);
  }

  // flatness.csv
  {
    const auto path = std::filesystem::path(o.out_dir) / "flatness.csv";
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (f == nullptr) throw BadInput("cannot write " + path.string());
    for (int k = 0; k < s.ambient_dim(); ++k) std::fprintf(f, "x%d,", k);
    std::fprintf(f, "r,alpha,beta1,betainf\n");
    for (Index p : probes) {
      const Vec x = s.point(p);
      for (Scalar r : radii) {
        const Scalar a = alpha(s, x, r);
        const auto b1 = beta1(s, x, r);
        const auto bi = beta_inf(s, x, r);
        for (int k = 0; k < s.ambient_dim(); ++k) {
          std::fprintf(f, "%.17g,", x[k]);
        }
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r, a, b1.value, bi.value);
      }
    }
    std::fclose(f);
  }

  // carleson.json
  {
    json j = report_envelope(o);
    auto recs = json::array();
    Scalar max_dyadic = 0, max_integral = 0;
    const auto eq = check_dyadic_equivalence(s, probes, ladder);
    for (const auto& rec : eq.records) {
      max_dyadic = std::max(max_dyadic, rec.dyadic);
      max_integral = std::max(max_integral, rec.integral);
      recs.push_back({{"probe", rec.probe},
                      {"dyadic_sum", rec.dyadic},
                      {"integral", rec.integral},
                      {"ratio", rec.ratio},
                      {"degenerate", rec.degenerate}});
    }
    j["total"] = max_dyadic;  // worst dyadic oscillation sum over the probes
    j["max_integral"] = max_integral;
    j["ratio_min"] = eq.min_ratio;
    j["ratio_max"] = eq.max_ratio;
    j["records"] = std::move(recs);
    write_json(o, "carleson.json", j);
  }
  return kExitOk;
}

int cmd_parametrize(const Options& o) {
  const auto s = load_surface(o);
  const ScaleLadder ladder{o.r_base, o.ratio, o.depth};
  const Vec center = region_center_of(o, s.ambient_dim());

  CCBP c;
  CcbpBuildStats stats;
  try {
    c = build_ccbp(s, center, o.region_radius, ladder, o.eps_target, &stats);
  } catch (const EpsilonExceeded& e) {
    json err;
    err["error"] = "EpsilonExceeded";
    err["achieved_eps"] = e.achieved_eps;
    err["eps_target"] = o.eps_target;
    err["worst_pair"] = e.worst_pair;
    std::cerr << err.dump() << "\n";
    return kExitEpsilon;
  }

  {
    json j = report_envelope(o);
    json body;
    to_json(body, c);
    j.update(body);
    j["max_lhs_over_alpha"] = stats.max_lhs_over_alpha;
    write_json(o, "ccbp.json", j);
  }

  const Scalar spacing = ladder.r(ladder.depth) / 4;
  const auto trace = run_flow(c, spacing);

  {  // flow.csv: z, f1(z), ..., fK(z)
    const auto path = std::filesystem::path(o.out_dir) / "flow.csv";
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (f == nullptr) throw BadInput("cannot write " + path.string());
    const int d = s.ambient_dim();
    for (int k = 0; k < d; ++k) std::fprintf(f, "z%d,", k);
    for (size_t st = 1; st < trace.stages.size(); ++st) {
      for (int k = 0; k < d; ++k) {
        std::fprintf(f, "f%zu_%d%s", st, k,
                     (st + 1 == trace.stages.size() && k + 1 == d) ? "" : ",");
      }
    }
    std::fprintf(f, "\n");
    for (Index i = 0; i < trace.grid.rows(); ++i) {
      for (int k = 0; k < d; ++k) std::fprintf(f, "%.17g,", trace.grid(i, k));
      for (size_t st = 1; st < trace.stages.size(); ++st) {
        for (int k = 0; k < d; ++k) {
          std::fprintf(f, "%.17g%s", trace.stages[st](i, k),
                       (st + 1 == trace.stages.size() && k + 1 == d) ? "" : ",");
        }
      }
      std::fprintf(f, "\n");
    }
    std::fclose(f);
  }

  {  // bilip.json
    const Scalar n_criterion = bilip_criterion(trace);
    const auto est = bilip_estimate(trace);
    json j = report_envelope(o);
    j["square_sum_criterion"] = n_criterion;
    j["k_lower"] = est.k_lower;
    j["worst_pair"] = {est.a, est.b};
    j["grid_points"] = trace.grid.rows();
    j["grid_spacing"] = trace.grid_spacing;
    j["max_total_displacement"] = trace.max_total_displacement;
    auto steps = json::array();
    for (size_t k = 0; k < trace.max_step.size(); ++k) {
      steps.push_back({{"level", k},
                       {"r_k", trace.r_k[k]},
                       {"max_step", trace.max_step[k]}});
    }
    j["per_level_steps"] = std::move(steps);
    write_json(o, "bilip.json", j);
  }

  {  // reifenberg.json
    std::vector<Scalar> radii;
    for (int k = 0; k <= ladder.depth; ++k) radii.push_back(ladder.r(k));
    json j = report_envelope(o);
    try {
      const auto audit = reifenberg_audit(trace.stages.back(), radii, o.probes);
      j["worst_flatness"] = audit.worst;
      j["worst_radius"] = audit.worst_radius;
      j["probes_used"] = audit.probes_used;
    } catch (const ResolutionExceeded& e) {
      j["worst_flatness"] = nullptr;
      j["note"] = e.what();
    }
    write_json(o, "reifenberg.json", j);
  }
  return kExitOk;
}

int cmd_check_poincare(const Options& o) {
  const auto s = load_surface(o);
  const ScaleLadder ladder{o.r_base, o.ratio, o.depth};
  const Vec center = region_center_of(o, s.ambient_dim());
  const auto radii = resolvable_ladder_radii(s, ladder);
  const auto probes = draw_probes(s, center, o.region_radius, o.probes, o.seed);

  const int d = s.ambient_dim();
  std::vector<TestFunction> fns;
  {
    Vec a = Vec::Zero(d);
    a[0] = 1;
    if (d > 1) a[d - 1] = 0.5;
    fns.push_back(TestFunction::linear(a));
    Vec far = Vec::Ones(d) * 2.0;
    fns.push_back(TestFunction::dist_to_point(far));
    Vec c = Vec::Zero(d);
    fns.push_back(TestFunction::bump(c, 1.0, 0.2));
    fns.push_back(TestFunction::random_trig(d, 8.0, o.seed));
    // sheet-shaped probe along the last axis: catches locally-constant
    // oscillation across disconnected layers
    Vec k = Vec::Zero(d);
    k[d - 1] = M_PI / (2 * std::max(o.sheet_gap, 1e-3));
    fns.push_back(TestFunction::trig({k}, {1.0}, {0.0}));
  }

  const auto rep = poincare_audit(s, fns, probes, radii);
  json j = report_envelope(o);
  j["c_p"] = rep.c_p;
  j["hard_failures"] = rep.hard_failures;
  j["skipped_degenerate"] = rep.skipped_degenerate;
  auto recs = json::array();
  for (const auto& rec : rep.records) {
    recs.push_back({{"function", rec.function},
                    {"probe", rec.probe},
                    {"r", rec.r},
                    {"lhs", rec.lhs},
                    {"rhs_core", rec.rhs_core},
                    {"ratio", rec.ratio},
                    {"hard_failure", rec.hard_failure}});
  }
  j["records"] = std::move(recs);
  write_json(o, "poincare_report.json", j);
  return rep.hard_failures > 0 ? kExitViolation : kExitOk;
}

int cmd_check_quasiconvex(const Options& o) {
  const auto s = load_surface(o);
  const auto rep = quasiconvexity_audit(s, 0, o.probes, o.seed);
  json j = report_envelope(o);
  j["kappa"] = std::isfinite(rep.kappa) ? json(rep.kappa) : json("inf");
  j["connected"] = rep.connected;
  j["components"] = rep.components;
  j["connection_radius"] = rep.h;
  j["sources"] = rep.sources;
  j["worst_pair"] = {{"a", rep.worst.a},
                     {"b", rep.worst.b},
                     {"graph_dist", rep.worst.graph_dist},
                     {"euclid", rep.worst.euclid},
                     {"ratio", rep.worst.ratio}};
  write_json(o, "quasiconvexity_report.json", j);
  return rep.connected ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for multiscale flatness analysis and "
               "plane-flow parametrization of sampled hypersurfaces"};
  app.require_subcommand(1);
  Options o;

  auto* zoo = app.add_subcommand("zoo", "surface generators");
  auto* gen = zoo->add_subcommand("generate", "write a zoo surface as CSV");
  add_common(gen, o);
  gen->add_option("--out", o.out_file, "output CSV path")->required();

  auto* analyze =
      app.add_subcommand("analyze", "flatness statistics and oscillation sums");
  add_common(analyze, o);

  auto* param = app.add_subcommand(
      "parametrize", "coherent collection, flow, distortion and flatness");
  add_common(param, o);

  auto* check = app.add_subcommand("check", "metric inequality audits");
  auto* poin = check->add_subcommand("poincare", "oscillation inequality audit");
  add_common(poin, o);
  auto* quasi =
      check->add_subcommand("quasiconvex", "intrinsic path-length audit");
  add_common(quasi, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  set_threads(o.threads);

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (analyze->parsed()) return cmd_analyze(o);
    if (param->parsed()) return cmd_parametrize(o);
    if (poin->parsed()) return cmd_check_poincare(o);
    if (quasi->parsed()) return cmd_check_quasiconvex(o);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const BadInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BadSpec& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}
