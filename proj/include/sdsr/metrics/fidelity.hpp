#pragma once

#include <cstdint>
#include <vector>

#include "sdsr/data/oracle.hpp"
#include "sdsr/gen/generator.hpp"

namespace sdsr {

// Distributional fidelity of a trained degradation generator against the
// ground-truth oracle: Wasserstein-1 distance between the two empirical
// per-image noise-std distributions, plus mean L1 to the noise-free
// downsample (content drift).
struct FidelityReport {
  double w1 = 0.0;
  double mean_l1_to_clean = 0.0;
  bool used_paired_fallback = false;  // flat-region estimator was degenerate somewhere
  std::vector<double> gen_stds;
  std::vector<double> oracle_stds;
};

FidelityReport degrader_fidelity(DegradationGenerator& gen, const OracleDegradation& oracle,
                                 const std::vector<ImageBatch>& hr_set, int n_samples,
                                 uint64_t seed);

}  // namespace sdsr
