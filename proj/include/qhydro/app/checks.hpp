#pragma once

#include <string>
#include <vector>

namespace qhydro::app {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// Names of the quick invariant checks, in run order.
const std::vector<std::string>& check_names();

/// Runs the named checks (all when `only` is empty), each at desk scale in
/// well under a second. Unknown names throw ConfigError.
std::vector<CheckResult> run_checks(const std::vector<std::string>& only = {});

}  // namespace qhydro::app
