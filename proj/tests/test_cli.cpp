#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qhydro/app/checks.hpp"
#include "qhydro/app/commands.hpp"
#include "qhydro/app/config.hpp"
#include "qhydro/app/manifest.hpp"
#include "qhydro/app/svg.hpp"
#include "qhydro/error.hpp"
#include "qhydro/schrodinger.hpp"

using namespace qhydro;
using namespace qhydro::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = QHYDRO_SOURCE_DIR;
const fs::path cli = QHYDRO_CLI_PATH;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qhydro_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Exec {
  int status;
  std::string err;
};

Exec exec(const std::string& args, const fs::path& work) {
  const auto err = work / "stderr.txt";
  const std::string cmd = cli.string() + " " + args + " 2> " + err.string() + " > " + (work / "stdout.txt").string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* minimal_evolve = R"({
  "command": "evolve",
  "grid": {"n": [64], "lo": [-10.0], "hi": [10.0]},
  "params": {"initial": {"type": "gaussian", "sigma": 1.0}, "dt": 0.01, "steps": 20, "every": 10}
})";

}  // namespace

TEST_CASE("minimal evolve config parses") {
  const auto cfg = parse_config(minimal_evolve);
  CHECK(cfg.command == "evolve");
  REQUIRE(cfg.grid);
  CHECK(cfg.grid->n[0] == 64);
  const auto& p = std::get<EvolveParams>(cfg.params);
  CHECK(p.steps == 20);
  CHECK(p.potential.kind == PotentialSpec::Kind::zero);
}

TEST_CASE("unknown keys are rejected with their path") {
  auto j = json::parse(minimal_evolve);
  j["colour"] = "blue";
  CHECK(config_error(j.dump()).find("colour") != std::string::npos);

  j = json::parse(minimal_evolve);
  j["params"]["initial"]["sigmaa"] = 2.0;
  CHECK(config_error(j.dump()).find("params.initial.sigmaa") != std::string::npos);

  j = json::parse(minimal_evolve);
  j["grid"]["spacing"] = 0.1;
  CHECK(config_error(j.dump()).find("grid.spacing") != std::string::npos);
}

TEST_CASE("schema violations are config errors") {
  CHECK_FALSE(config_error("{").empty());
  CHECK_FALSE(config_error(R"({"command": "fly"})").empty());
  auto j = json::parse(minimal_evolve);
  j.erase("grid");
  CHECK(config_error(j.dump()).find("grid") != std::string::npos);
  j = json::parse(minimal_evolve);
  j["params"]["dt"] = -1.0;
  CHECK(config_error(j.dump()).find("params.dt") != std::string::npos);
  j = json::parse(minimal_evolve);
  j["params"]["initial"]["center"] = {0.0, 1.0};
  CHECK(config_error(j.dump()).find("center") != std::string::npos);
  CHECK_FALSE(config_error(R"({"command": "bi", "grid": {"n": [8], "lo": [0], "hi": [1]}, "params": {"b": 1}})").empty());
  CHECK_THROWS_AS(run_checks({"no_such_check"}), ConfigError);
}

TEST_CASE("every command name has a parser") {
  CHECK(command_names().size() == 11);
  for (const auto& name : command_names()) {
    const auto msg = config_error(json{{"command", name}}.dump());
    CHECK_MESSAGE(msg.find("unknown command") == std::string::npos, name);
  }
}

TEST_CASE("exit codes") {
  const auto work = scratch("exit");

  auto ok = exec("--config " + (source_dir / "tools/configs/evolve.json").string() + " --out " +
                     (work / "ok").string() + " --quiet",
                 work);
  CHECK(ok.status == 0);
  CHECK(ok.err.empty());

  std::ofstream(work / "bad.json") << R"({"command": "evolve", "grid": {"n": [8], "lo": [0], "hi": [1]}, "oops": 1})";
  auto bad = exec("--config " + (work / "bad.json").string() + " --out " + (work / "bad").string(), work);
  CHECK(bad.status == 2);
  const auto diag = json::parse(bad.err);
  CHECK(diag["error"] == "config");
  CHECK(diag["exit_code"] == 2);
  CHECK_FALSE(fs::exists(work / "bad"));

  CHECK(exec("--config " + (work / "missing.json").string(), work).status == 2);
  CHECK(exec("--frobnicate", work).status == 2);
  CHECK(exec("", work).status == 2);

  std::ofstream(work / "unstable.json") << R"({"command": "evolve-kg",
    "grid": {"n": [64], "lo": [0.0], "hi": [6.283185307179586]},
    "params": {"initial": {"type": "gaussian", "center": [3.0], "sigma": 0.5},
               "enforce_stability": false, "dt": 0.2, "steps": 2000}})";
  auto unstable = exec("--config " + (work / "unstable.json").string() + " --out " + (work / "u").string(), work);
  CHECK(unstable.status == 3);
  CHECK(json::parse(unstable.err)["error"] == "numeric");

  auto supercritical = exec("bi --E 2 0 0 --b 1", work);
  CHECK(supercritical.status == 3);
  CHECK(json::parse(supercritical.err)["error"] == "domain");
}

TEST_CASE("bi subcommand prints invariants and Lagrangian") {
  const auto work = scratch("bi");
  const auto r = exec("bi --E 0.3 0 0 --B 0 0.2 0 --b 1 --no-self-energy --radial-csv " +
                          (work / "radial.csv").string() + " --r-max 2 --points 5",
                      work);
  REQUIRE(r.status == 0);
  const auto j = json::parse(slurp(work / "stdout.txt"));
  CHECK(j["S"].get<double>() == doctest::Approx(0.5 * (0.09 - 0.04)).epsilon(1e-15));
  CHECK(j["P"].get<double>() == 0.0);
  CHECK(j["lagrangian"].get<double>() > j["S"].get<double>());
  CHECK_FALSE(j.contains("self_energy"));
  const auto csv = slurp(work / "radial.csv");
  CHECK(csv.rfind("r,E,E_coulomb,energy_density\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("manifest lists every emitted file with its checksum") {
  const auto work = scratch("manifest");
  for (const char* name : {"trajectories", "rays", "geometry", "bi", "decompose"}) {
    const auto dir = work / name;
    auto cfg = load_config((source_dir / "tools/configs" / (std::string(name) + ".json")).string());
    run(cfg, {dir.string(), std::nullopt, true}, std::cerr);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == cfg.command);
    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) {
      const auto content = slurp(dir / f["path"].get<std::string>());
      CHECK(f["bytes"].get<std::size_t>() == content.size());
      CHECK(f["sha256"] == sha256_hex(content));
      listed.insert(f["path"].get<std::string>());
    }
    std::set<std::string> present;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() != "manifest.json")
        present.insert(fs::relative(e.path(), dir).generic_string());
    CHECK_MESSAGE(listed == present, name);
    CHECK(listed.count("report.json") == 1);
  }
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("repeated runs are byte-identical") {
  const auto work = scratch("determinism");
  const auto config = (source_dir / "tools/configs/trajectories.json").string();
  for (const char* run_name : {"a", "b"})
    REQUIRE(exec("--config " + config + " --out " + (work / run_name).string() + " --quiet", work).status == 0);
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), work / "a");
    CHECK_MESSAGE(slurp(e.path()) == slurp(work / "b" / rel), rel.string());
    ++compared;
  }
  CHECK(compared >= 8);
}

TEST_CASE("seed override changes only the ensemble") {
  const auto work = scratch("seed");
  auto cfg = load_config((source_dir / "tools/configs/trajectories.json").string());
  const auto a = run(cfg, {(work / "a").string(), 1, true}, std::cerr);
  const auto b = run(cfg, {(work / "b").string(), 2, true}, std::cerr);
  CHECK(a.report["trajectories"] == b.report["trajectories"]);
  CHECK(a.report["ensemble"]["l1"] != b.report["ensemble"]["l1"]);
  CHECK(a.manifest["seed"] == 1);
}

TEST_CASE("check command reports every invariant") {
  const auto work = scratch("check");
  const auto cfg = parse_config(R"({"command": "check", "params": {"only": ["madelung_round_trip", "flat_polar_torsion"]}})");
  const auto r = run(cfg, {(work / "c").string(), std::nullopt, true}, std::cerr);
  CHECK(r.ok);
  REQUIRE(r.report["checks"].size() == 2);
  for (const auto& c : r.report["checks"]) {
    CHECK(c["passed"] == true);
    const double value = c["value"].get<double>(), tol = c["tolerance"].get<double>();
    CHECK(value < tol);
  }
}

TEST_CASE("svg: empty inputs draw axes only") {
  const svg::Style style{640, 420, "empty", "x", "t"};
  for (const auto& doc : {svg::line_plot({}, style), svg::trajectory_overlay({}, {}, {}, style)}) {
    CHECK(doc.rfind("<svg", 0) == 0);
    CHECK(doc.find("</svg>") != std::string::npos);
    CHECK(doc.find("<polyline") == std::string::npos);
    CHECK(doc.find("<line") != std::string::npos);
    CHECK(doc.find(">x</text>") != std::string::npos);
  }
}

TEST_CASE("svg: 1D field is a labelled polyline") {
  const auto g = GridSpec::line(32, -1.0, 1.0);
  const auto f = RealField::from_function(g, [](const Point& x) { return x[0] * x[0]; });
  const auto doc = svg::plot_field(f, {640, 420, "parabola", "x [m]", "f [J]"});
  CHECK(doc.find("<polyline") != std::string::npos);
  CHECK(doc.find("x [m]") != std::string::npos);
  CHECK(doc.find("f [J]") != std::string::npos);
}

TEST_CASE("svg: 2D field is a raster, 3D is rejected") {
  const auto g2 = GridSpec::cube(2, 16, 0.0, 1.0);
  const auto doc = svg::plot_field(RealField::constant(g2, 1.0), {});
  CHECK(std::count(doc.begin(), doc.end(), '\n') > 256);
  const auto g3 = GridSpec::cube(3, 8, 0.0, 1.0);
  try {
    svg::plot_field(RealField::constant(g3, 1.0), {});
    FAIL("3D field accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("slice") != std::string::npos);
  }
}

TEST_CASE("svg: Gaussian with five trajectories matches the golden file") {
  const auto g = GridSpec::line(128, -12.0, 12.0);
  const UnitSystem u;
  const auto psi = gaussian_packet(g, {0, 0, 0}, 1.0);
  const auto series = evolve_series(psi, PotentialSpec::zero(), {0.01, 200, u}, 10);
  const std::vector<Point> seeds{{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const auto paths = bohm_trajectories(series, seeds, u, {.dt = 0.01});
  std::vector<RealField> amp;
  for (const auto& f : series.frames) {
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f[i]);
    amp.emplace_back(g, std::move(v));
  }
  const auto doc = svg::trajectory_overlay(series.times, amp, paths, {640, 420, "free Gaussian", "x", "t"});
  CHECK(std::count(doc.begin(), doc.end(), '\n') > 100);
  const auto normalized = svg::normalize_numbers(doc, 1);

  const auto golden = source_dir / "tests/golden/gaussian_trajectories.svg";
  const char* update = std::getenv("QHYDRO_UPDATE_GOLDEN");
  if (update && std::string(update) == "1") {
    std::ofstream(golden, std::ios::binary) << normalized;
    MESSAGE("golden file rewritten");
  }
  REQUIRE(fs::exists(golden));
  CHECK(normalized == slurp(golden));
}
