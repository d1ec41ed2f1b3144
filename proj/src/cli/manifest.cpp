#include "sdsr/cli/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "sdsr/cli/config.hpp"
#include "sdsr/core/errors.hpp"

namespace fs = std::filesystem;

namespace sdsr {

using nlohmann::json;

namespace {

json stable_fields(const RunManifest& m) {
  json j;
  j["stage"] = m.stage;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j;
}

}  // namespace

uint64_t manifest_hash(const RunManifest& m) { return fnv1a64(stable_fields(m).dump()); }

void write_manifest(const std::string& run_dir, const RunManifest& m) {
  json j = stable_fields(m);
  j["wall_clock_s"] = m.wall_clock_s;
  j["manifest_hash"] = hash_hex(manifest_hash(m));
  std::ofstream os(fs::path(run_dir) / "manifest.json");
  if (!os) throw Error(ExitCode::kFailure, "cannot write manifest under " + run_dir);
  os << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& run_dir) {
  const fs::path path = fs::path(run_dir) / "manifest.json";
  std::ifstream is(path);
  if (!is) throw MissingInputError("no manifest at " + path.string());
  json j;
  is >> j;
  RunManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.wall_clock_s = j.value("wall_clock_s", 0.0);
  return m;
}

void verify_run_dir(const std::string& run_dir) {
  const RunManifest m = read_manifest(run_dir);
  std::map<std::string, int> listed;
  for (const auto& o : m.outputs) ++listed[o];
  for (const auto& [path, count] : listed)
    if (count != 1)
      throw Error(ExitCode::kFailure,
                  "manifest lists '" + path + "' " + std::to_string(count) + " times");

  for (const auto& [path, count] : listed)
    if (!fs::exists(fs::path(run_dir) / path))
      throw Error(ExitCode::kFailure, "manifest output missing on disk: " + path);

  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), run_dir).generic_string();
    if (rel == "manifest.json") continue;
    if (listed.find(rel) == listed.end())
      throw Error(ExitCode::kFailure, "orphan artifact not in any manifest: " + rel);
  }
}

}  // namespace sdsr
