#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qhydro/app/commands.hpp"
#include "qhydro/app/config.hpp"
#include "qhydro/borninfeld.hpp"
#include "qhydro/error.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

int fail(int code, const std::string& kind, const std::string& message) {
  const nlohmann::json diag{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << diag.dump() << '\n';
  return code;
}

std::array<double, 3> vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum hydrodynamics toolkit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config seed)");
  app.add_flag("--quiet", quiet, "suppress progress messages");

  auto* bi = app.add_subcommand("bi", "Born-Infeld invariants and Lagrangian for one field sample");
  std::vector<double> E{0, 0, 0}, B{0, 0, 0};
  qhydro::app::BIRunParams bp;
  std::string radial_csv;
  bi->add_option("--E", E, "electric field (3 components)")->expected(3);
  bi->add_option("--B", B, "magnetic field (3 components)")->expected(3);
  bi->add_option("--b", bp.b, "field strength parameter");
  bi->add_option("--q", bp.q, "point charge");
  bi->add_flag("!--no-self-energy", bp.self_energy, "skip the self-energy quadrature");
  bi->add_option("--radial-csv", radial_csv, "write the point-charge radial profile to this file");
  bi->add_option("--r-max", bp.r_max, "radial profile extent");
  bi->add_option("--points", bp.radial_points, "radial profile sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(exit_config, "usage", e.what());
  }

  try {
    if (bi->parsed()) {
      bp.E = vec3(E);
      bp.B = vec3(B);
      const auto report = qhydro::app::bi_report(bp);
      if (!radial_csv.empty()) {
        if (bp.radial_points < 2 || !(bp.r_max > 0.0)) throw qhydro::ConfigError("--radial-csv needs --r-max > 0 and --points >= 2");
        std::vector<double> r(bp.radial_points);
        for (std::size_t i = 0; i < r.size(); ++i)
          r[i] = bp.r_max * static_cast<double>(i) / static_cast<double>(r.size() - 1);
        std::ofstream os(radial_csv);
        if (!os) throw qhydro::ConfigError("cannot open " + radial_csv);
        qhydro::bi::io::write_radial_csv(os, {bp.b, bp.q}, r);
      }
      std::cout << report.dump(2) << '\n';
      return exit_ok;
    }
    if (config_path.empty()) return fail(exit_config, "usage", "--config is required");
    const auto cfg = qhydro::app::load_config(config_path);
    qhydro::app::RunOptions opts;
    if (*out_opt) opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = seed;
    opts.quiet = quiet;
    const auto result = qhydro::app::run(cfg, opts, std::cerr);
    if (!result.ok) return fail(exit_numeric, "check_failed", "one or more checks failed; see report.json");
    return exit_ok;
  } catch (const qhydro::ConfigError& e) {
    return fail(exit_config, "config", e.what());
  } catch (const qhydro::DomainError& e) {
    return fail(exit_numeric, "domain", e.what());
  } catch (const qhydro::NumericError& e) {
    return fail(exit_numeric, "numeric", e.what());
  } catch (const std::exception& e) {
    return fail(exit_numeric, "internal", e.what());
  }
}
