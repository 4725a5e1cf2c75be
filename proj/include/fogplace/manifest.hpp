#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fogplace {

inline constexpr const char* kToolVersion = "1.0.0";

std::string sha256_hex(std::string_view data);
/// Digest of the raw file bytes (compressed files are hashed as stored).
std::string sha256_file(const std::string& path);

/// Current time as ISO-8601 UTC with millisecond precision.
std::string utc_now();

/// Provenance record written next to every command output. Two runs with
/// equal `fingerprint()` produce byte-identical outputs.
struct RunManifest {
  std::string command;
  std::string config;       // canonical key=value text of the effective settings
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
  std::string started_utc;
  std::string finished_utc;

  std::string config_hash() const { return sha256_hex(config); }
  /// Hash over command, config, seed, input digests and tool version.
  std::string fingerprint() const;
  nlohmann::json to_json() const;

  void add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }
  void add_output(const std::string& path) { outputs.emplace_back(path, sha256_file(path)); }
};

/// Writes the manifest to `path` (pretty JSON, trailing newline).
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace fogplace
