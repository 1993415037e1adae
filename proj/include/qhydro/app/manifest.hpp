#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace qhydro::app {

// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes artifacts into one output directory, creating it on demand.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  const std::filesystem::path& path() const { return dir_; }
  // Writes `content` to dir/name (name may contain subdirectories).
  void write(const std::string& name, const std::string& content) const;
  void write_json(const std::string& name, const nlohmann::json& j) const;

 private:
  std::filesystem::path dir_;
};

/// Lists every regular file under `dir` except manifest.json itself, sorted
/// by relative path, with its size and SHA-256, and writes the result to
/// dir/manifest.json. `extra` entries are merged at the top level.
nlohmann::json write_manifest(const std::filesystem::path& dir, const nlohmann::json& extra);

}  // namespace qhydro::app
