#pragma once

#include <cstdint>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Ground-truth stochastic degradation used to verify the learned generators:
// fixed bicubic downsample, then i.i.d. Gaussian noise with a per-image
// standard deviation drawn uniformly from [sigma_lo, sigma_hi] on the 8-bit
// scale, then clamp. The per-image draw makes p(lr | hr) genuinely
// multimodal, which no deterministic generator can match.
struct OracleDegradation {
  int scale = 4;
  double sigma_lo = 5.0;   // 8-bit scale
  double sigma_hi = 25.0;  // 8-bit scale
  uint64_t seed = 0;       // mixed into every per-call stream
};

// Bit-reproducible for identical (hr, oracle, rng_seed).
ImageBatch oracle_degrade(const ImageBatch& hr, const OracleDegradation& oracle,
                          uint64_t rng_seed);

// noise-free arm of the oracle (the downsample the noise rides on)
ImageBatch oracle_clean(const ImageBatch& hr, const OracleDegradation& oracle);

}  // namespace sdsr
