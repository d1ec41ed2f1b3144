#pragma once

#include <string>

#include "sdsr/cli/config.hpp"

namespace sdsr {

// Stage directories are run-stamped by stage-scoped config hash and seed, so
// reruns of the same configuration land in the same place.
std::string resolve_prepare_dir(const ExperimentConfig& cfg);
std::string resolve_degraders_dir(const ExperimentConfig& cfg);
std::string resolve_sr_dir(const ExperimentConfig& cfg);

// Rewrites the collaborative-training section for one of the ablation arms
// (Table-2 style): cl | cl_no_ada | naive | single | bicubic.
struct ArmSetup {
  CollabConfig collab;
  CollabDataMode data_mode;
  int generators_used;  // -1 = all
};
ArmSetup apply_ablation_arm(const ExperimentConfig& cfg);

// Stage commands. Each returns a process exit code (0 ok, 4 divergence);
// configuration, missing-input and staleness failures are thrown as Error
// and mapped to exit codes by the caller.
int cmd_prepare(const ExperimentConfig& cfg);
int cmd_train_degraders(const ExperimentConfig& cfg);
int cmd_train_sr(const ExperimentConfig& cfg);
int cmd_evaluate(const ExperimentConfig& cfg);
int cmd_robustness(const ExperimentConfig& cfg);
int cmd_ablate(const ExperimentConfig& cfg);

}  // namespace sdsr
