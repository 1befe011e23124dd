#pragma once

// Run manifests: what was run, on which inputs, and what it produced.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace crowdpose {

inline constexpr std::string_view kToolName = "crowdpose-kit";
inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Digests of every regular file under the directory `path` keyed by generic
/// relative path, or of the file `path` keyed by its file name. Sorted;
/// `exclude` (if it names a file in the tree) is skipped.
std::vector<std::pair<std::string, std::string>> digest_tree(
    const std::filesystem::path& path, const std::filesystem::path& exclude = {});

struct RunManifest {
  std::vector<std::string> argv;
  std::string command;
  std::optional<std::uint64_t> seed;
  /// Options that affect outputs; excludes --jobs and --manifest.
  nlohmann::json options = nlohmann::json::object();
  /// Input path -> SHA-256 of its content (files under directories included).
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
  double duration_seconds = 0.0;
  int exit_code = 0;
  std::string error;  ///< diagnostic of a failed run

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path, const std::filesystem::path& exclude = {});
  /// SHA-256 over the canonical JSON of {command, seed, options, inputs}.
  std::string config_digest() const;
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace crowdpose
