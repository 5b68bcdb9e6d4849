#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlab/flatness.hpp"
#include "rlab/measure.hpp"
#include "rlab/rng.hpp"
#include "rlab/surface.hpp"
#include "rlab/zoo.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rlab;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rlab_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path errfile = dir / "stderr.txt";
  const std::string cmd = std::string(RLAB_CLI_PATH) + " " + args + " 2> " +
                          errfile.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(raw);
  std::ifstream in(errfile);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stderr_text = ss.str();
  return r;
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("zoo generate writes a loadable csv identical to the library path") {
  const auto dir = fresh_dir("zoo");
  const auto out = dir / "plane.csv";
  const auto r = run_cli(
      "zoo generate --shape plane --samples 5000 --seed 9 --out " + out.string(),
      dir);
  CHECK(r.exit_code == 0);
  const auto loaded = DiscreteSurface::load_csv(out.string());

  ZooSpec spec;
  spec.shape = ZooShape::kPlane;
  spec.n = 2;
  spec.samples = 5000;
  spec.seed = 9;
  const auto direct = generate(spec);
  REQUIRE(loaded.size() == direct.size());
  CHECK((loaded.points() - direct.points()).cwiseAbs().maxCoeff() == 0);
  CHECK((loaded.weights() - direct.weights()).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("analyze on a plane reports a vanishing oscillation total") {
  const auto dir = fresh_dir("analyze_plane");
  const auto r = run_cli("analyze --shape plane --samples 50000 --probes 6 "
                         "--seed 3 --out-dir " + dir.string(),
                         dir);
  CHECK(r.exit_code == 0);
  const auto carleson = load_json(dir / "carleson.json");
  CHECK(std::abs(carleson["total"].get<double>()) <= 1e-9);
  CHECK(fs::exists(dir / "ahlfors.json"));
  CHECK(fs::exists(dir / "flatness.csv"));
}

TEST_CASE("a missing input file is a usage error") {
  const auto dir = fresh_dir("missing");
  const auto r = run_cli("analyze --input /no/such/file.csv --out-dir " +
                         dir.string(), dir);
  CHECK(r.exit_code == 2);
}

TEST_CASE("an unresolvable ladder is a compute error, not a usage error") {
  const auto dir = fresh_dir("compute_err");
  const auto r = run_cli("analyze --shape plane --samples 2000 "
                         "--r-base 1e-5 --ratio 3 --depth 1 --out-dir " +
                         dir.string(), dir);
  CHECK(r.exit_code == 3);
}

TEST_CASE("cli analyze equals direct library calls on the same sphere") {
  const auto dir = fresh_dir("golden");
  const std::uint64_t seed = 12;
  const int probes = 5;
  const auto r = run_cli(
      "analyze --shape sphere --samples 100000 --seed 12 --probes 5 "
      "--region-center 0,0,1 --region-radius 0.35 --r-base 0.2 --ratio 3 "
      "--depth 3 --out-dir " + dir.string(),
      dir);
  REQUIRE(r.exit_code == 0);

  ZooSpec spec;
  spec.shape = ZooShape::kSphere;
  spec.n = 2;
  spec.samples = 100000;
  spec.seed = seed;
  const auto s = generate(spec);
  Vec pole(3);
  pole << 0, 0, 1;

  // replicate the CLI probe draw and compare the oscillation records exactly
  auto pool = s.index().range_query({pole, 0.35});
  std::vector<Index> want_probes;
  for (int t = 0; t < probes; ++t) {
    want_probes.push_back(pool[splitmix64(seed ^ splitmix64(t)) % pool.size()]);
  }
  const auto eq = check_dyadic_equivalence(s, want_probes, ScaleLadder{0.2, 3, 3});

  const auto carleson = load_json(dir / "carleson.json");
  REQUIRE(carleson["records"].size() == eq.records.size());
  for (size_t i = 0; i < eq.records.size(); ++i) {
    CHECK(carleson["records"][i]["probe"].get<Index>() == eq.records[i].probe);
    CHECK(carleson["records"][i]["dyadic_sum"].get<double>() ==
          eq.records[i].dyadic);
    CHECK(carleson["records"][i]["integral"].get<double>() ==
          eq.records[i].integral);
  }
}

TEST_CASE("parametrize on a plane is the identity parametrization") {
  const auto dir = fresh_dir("param_plane");
  const auto r = run_cli(
      "parametrize --shape plane --samples 40000 --r-base 0.12 --ratio 3 "
      "--depth 2 --region-radius 0.35 --out-dir " + dir.string(),
      dir);
  REQUIRE(r.exit_code == 0);
  const auto bilip = load_json(dir / "bilip.json");
  CHECK(bilip["k_lower"].get<double>() <= 1 + 1e-6);
  CHECK(bilip["square_sum_criterion"].get<double>() <= 1e-12);
  CHECK(fs::exists(dir / "ccbp.json"));
  CHECK(fs::exists(dir / "flow.csv"));
  CHECK(fs::exists(dir / "reifenberg.json"));
}

TEST_CASE("parametrize refuses the lacunary graph at a small eps target") {
  const auto dir = fresh_dir("param_snow");
  const auto r = run_cli(
      "parametrize --shape snowflake-like --dim 1 --samples 60000 "
      "--amplitude 2.5 --lambda 4 --gamma 0 --modes 6 --r-base 0.06 --ratio 3 "
      "--depth 3 --region-radius 0.4 --eps-target 0.05 --out-dir " +
          dir.string(),
      dir);
  CHECK(r.exit_code == 4);
  CHECK(r.stderr_text.find("EpsilonExceeded") != std::string::npos);
  CHECK(r.stderr_text.find("worst_pair") != std::string::npos);
}

TEST_CASE("distortion grows with the graph slope through the cli") {
  double prev = -1;
  for (const char* amp : {"0.0005", "0.002"}) {  // slopes 0.01 and 0.04
    const auto dir = fresh_dir(std::string("sweep_") + amp);
    const auto r = run_cli(
        "parametrize --shape graph-sin --dim 1 --samples 20000 --amplitude " +
            std::string(amp) +
            " --wavelength 0.05 --r-base 0.06 --ratio 3 --depth 2 "
            "--region-radius 0.4 --eps-target 1.0 --out-dir " + dir.string(),
        dir);
    REQUIRE(r.exit_code == 0);
    const double n = load_json(dir / "bilip.json")["square_sum_criterion"]
                         .get<double>();
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("quasiconvexity through the cli: plane passes, sheets exit 5") {
  const auto plane_dir = fresh_dir("qc_plane");
  const auto r1 = run_cli("check quasiconvex --shape plane --samples 40000 "
                          "--probes 4 --out-dir " + plane_dir.string(),
                          plane_dir);
  CHECK(r1.exit_code == 0);
  const auto rep = load_json(plane_dir / "quasiconvexity_report.json");
  CHECK(rep["kappa"].get<double>() < 1.2);
  CHECK(rep["connected"].get<bool>());

  const auto sheet_dir = fresh_dir("qc_sheets");
  const auto r2 = run_cli("check quasiconvex --shape two-sheet --samples 20000 "
                          "--probes 4 --out-dir " + sheet_dir.string(),
                          sheet_dir);
  CHECK(r2.exit_code == 5);
  const auto rep2 = load_json(sheet_dir / "quasiconvexity_report.json");
  CHECK(rep2["components"].get<int>() == 2);
  CHECK(rep2["kappa"].get<std::string>() == "inf");
}

TEST_CASE("poincare check through the cli: plane passes, sheets exit 5") {
  const auto plane_dir = fresh_dir("pc_plane");
  const auto r1 = run_cli("check poincare --shape plane --samples 50000 "
                          "--probes 6 --out-dir " + plane_dir.string(),
                          plane_dir);
  CHECK(r1.exit_code == 0);
  CHECK(load_json(plane_dir / "poincare_report.json")["hard_failures"]
            .get<int>() == 0);

  const auto sheet_dir = fresh_dir("pc_sheets");
  const auto r2 = run_cli("check poincare --shape two-sheet --samples 40000 "
                          "--sheet-gap 0.05 --probes 6 --out-dir " +
                          sheet_dir.string(), sheet_dir);
  CHECK(r2.exit_code == 5);
  const auto rep = load_json(sheet_dir / "poincare_report.json");
  CHECK(rep["hard_failures"].get<int>() > 0);
  bool witness = false;
  for (const auto& rec : rep["records"]) {
    if (rec["lhs"].get<double>() > 0.1 && rec["rhs_core"].get<double>() < 1e-3) {
      witness = true;
    }
  }
  CHECK(witness);
}

TEST_CASE("reruns are byte-identical") {
  const auto a = fresh_dir("repro_a");
  const auto b = fresh_dir("repro_b");
  const std::string args =
      "analyze --shape graph-sin --dim 1 --samples 20000 --amplitude 0.001 "
      "--seed 77 --probes 5 --region-radius 0.4 --r-base 0.06 --ratio 3 "
      "--depth 2 --out-dir ";
  REQUIRE(run_cli(args + a.string(), a).exit_code == 0);
  REQUIRE(run_cli(args + b.string(), b).exit_code == 0);
  for (const char* name : {"ahlfors.json", "carleson.json", "flatness.csv"}) {
    CHECK(read_file(a / name) == read_file(b / name));
  }
}
