#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdsr/data/corpus.hpp"
#include "sdsr/data/oracle.hpp"
#include "sdsr/sr/collab.hpp"
#include "sdsr/train/gan.hpp"

namespace sdsr {

struct DataConfig {
  std::string mode = "oracle";  // oracle | folder
  std::string root;             // folder mode: directory with hr/ and lr/
  int n_textures = 64;
  int texture_size = 96;
  int channels = 3;
  SplitRatios split;
  int patch_hr = 32;
  int scale = 4;
};

struct OracleConfig {
  double sigma_lo = 5.0;
  double sigma_hi = 25.0;
};

struct EnsembleConfig {
  std::vector<std::string> families = {"residual-chain", "attention-strided"};
  int width = 16;
  bool input_dependent_sigma = false;
  bool content_skip = true;
  bool freeze_sigma = false;  // deterministic baseline arm (sigma pinned at 0)
};

struct SrModelConfig {
  int blocks = 4;
  int width = 24;
};

struct MetricsConfig {
  int border_crop = 0;
  int fidelity_samples = 200;
  std::vector<double> robust_grid = {0, 5, 10, 15, 20};
};

struct IoConfig {
  std::string prepare_dir;    // default: <out>/prepare-<hash8>-s<seed>
  std::string degraders_dir;  // default: <out>/degraders-<hash8>-s<seed>
  std::string sr_dir;         // default: <out>/sr-<hash8>-s<seed>
};

// Whole-experiment configuration tree. Schema-validated: unknown keys are
// rejected with their path. The "paper" preset stores the published
// hyperparameters verbatim; "desk" is the minutes-scale CPU profile.
struct ExperimentConfig {
  std::string preset = "desk";
  uint64_t seed = 1;
  std::string out_dir = "runs";
  std::string ablation = "cl";  // cl | cl_no_ada | naive | single | bicubic

  DataConfig data;
  OracleConfig oracle;
  EnsembleConfig ensemble;
  DegraderTrainConfig degrader;
  CollabConfig collab;
  SrModelConfig sr_model;
  MetricsConfig metrics;
  IoConfig io;

  std::string to_json_text() const;  // canonical (sorted keys)
  void validate() const;

  // stage-scoped stale-artifact hashes
  uint64_t data_hash() const;      // data + oracle + seed
  uint64_t degrader_hash() const;  // data_hash + ensemble + degrader
  uint64_t sr_hash() const;        // degrader_hash + collab + sr_model + ablation
};

ExperimentConfig make_preset(const std::string& name);

// preset -> config file -> SDSR_* environment -> explicit overrides
ExperimentConfig load_experiment_config(const std::optional<std::string>& config_path,
                                        const std::optional<std::string>& preset_override,
                                        const std::optional<uint64_t>& seed_override,
                                        const std::optional<std::string>& out_override);

// Environment override: SDSR_<SECTION>__<KEY>=<json value>, e.g.
// SDSR_COLLAB__LAMBDA_COL=0.05 or SDSR_DATA__MODE='"folder"'.
inline constexpr const char* kEnvPrefix = "SDSR_";

std::string hash_hex(uint64_t h);
uint64_t fnv1a64(const std::string& s);

OracleDegradation oracle_from_config(const ExperimentConfig& cfg);
std::vector<GeneratorDesc> generator_descs(const ExperimentConfig& cfg);

}  // namespace sdsr
