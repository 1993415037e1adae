#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qhydro/app/config.hpp"

namespace qhydro::app {

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct RunResult {
  nlohmann::json manifest;
  nlohmann::json report;
  // False when the command ran but a check it performs failed.
  bool ok = true;
};

/// Executes one validated run: writes the command's artifacts and
/// report.json to the output directory, then manifest.json listing every
/// file there with its SHA-256. Progress goes to `log` unless quiet.
RunResult run(const RunConfig& cfg, const RunOptions& opts, std::ostream& log);

// Invariants, Lagrangian and point-charge summary; throws DomainError for a
// super-critical field.
nlohmann::json bi_report(const BIRunParams& p);

ComplexField build_wave(const WaveInit& w, const GridSpec& grid, const UnitSystem& units);

}  // namespace qhydro::app
