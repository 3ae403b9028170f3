#pragma once
// Named pipelines binding the simulation and analysis modules together.
// Every run writes its artifacts atomically plus a manifest with content
// digests; identical configurations produce byte-identical artifacts.

#include <cstdint>
#include <string>
#include <vector>

#include "qdc/config.hpp"

namespace qdc {

struct ManifestEntry {
  std::string name;    // relative to the output directory
  std::uint64_t bytes = 0;
  std::uint64_t digest = 0;  // fnv1a-64 over the file content
};

struct RunManifest {
  std::string version;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ManifestEntry> artifacts;
};

std::string manifest_to_text(const RunManifest& m);

// Executes the configured experiment. On failure after the output
// directory exists, a `.failed` marker with the error message is left
// behind and the error is rethrown.
RunManifest run(const ExperimentConfig& cfg);

// re-reads every artifact named in a written manifest and checks digests
bool verify_manifest_file(const std::filesystem::path& manifest_path,
                          std::string* first_mismatch = nullptr);

}  // namespace qdc
