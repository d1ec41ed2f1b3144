#pragma once

#include <cstdint>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Synthetic HR test textures: smooth low-frequency gratings and blobs pushed
// through a soft saturation, which leaves genuinely flat plateaus for the
// flat-region noise estimator. Values stay inside [0.1, 0.9] so additive
// noise is not distorted by clamping. Deterministic in (seed, index).
ImageBatch make_texture(int size, int channels, uint64_t seed, uint64_t index);

}  // namespace sdsr
