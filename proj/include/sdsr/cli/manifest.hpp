#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdsr {

// One manifest per run directory. The manifest hash covers the stable fields
// (stage, config hash, seed, inputs, outputs); wall-clock is runtime metadata
// and stays outside the hash so identical reruns hash identically.
struct RunManifest {
  std::string stage;
  std::string config_hash;  // hex, stage-scoped
  uint64_t seed = 0;
  std::vector<std::string> inputs;   // upstream artifacts (informative paths)
  std::vector<std::string> outputs;  // files relative to the run directory
  double wall_clock_s = 0.0;
};

uint64_t manifest_hash(const RunManifest& m);

void write_manifest(const std::string& run_dir, const RunManifest& m);
RunManifest read_manifest(const std::string& run_dir);

// Orphan check: every file below run_dir (manifest.json aside) must be listed
// exactly once in the manifest's outputs, and every listed output must exist.
void verify_run_dir(const std::string& run_dir);

}  // namespace sdsr
